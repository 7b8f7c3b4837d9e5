#include "kmcert/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kmcert/errors.hpp"

namespace kmcert {

namespace {

constexpr double kSvdEntryLimit = 1e6;
constexpr double kPowerTol = 1e-10;
constexpr int kPowerMaxIter = 10000;

std::string join_sizes(const std::vector<int>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(sizes[i]);
  }
  return out;
}

double power_iteration_norm(const Eigen::MatrixXd& block) {
  const Eigen::Index m = block.cols();
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m) / std::sqrt(static_cast<double>(m));
  double sigma_sq = 0.0;
  for (int it = 0; it < kPowerMaxIter; ++it) {
    Eigen::VectorXd next = block.transpose() * (block * v);
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    next /= norm;
    const double change = std::abs(norm - sigma_sq);
    sigma_sq = norm;
    v = next;
    if (change <= kPowerTol * sigma_sq) break;
  }
  return std::sqrt(sigma_sq);
}

}  // namespace

NotBalanced::NotBalanced(std::vector<int> sizes)
    : ValidationError("clusters are not balanced, sizes = [" + join_sizes(sizes) + "]"),
      sizes_(std::move(sizes)) {}

void Dataset::validate() const {
  if (points.rows() < 1 || points.cols() < 1) {
    throw ValidationError("dataset must have at least one point and one coordinate");
  }
  if (!points.allFinite()) throw ValidationError("dataset contains non-finite coordinates");
  if (truth_labels) {
    if (static_cast<Eigen::Index>(truth_labels->size()) != points.rows()) {
      throw DimensionMismatch("truth labels length " + std::to_string(truth_labels->size()) +
                              " does not match N = " + std::to_string(points.rows()));
    }
    (void)Partition::from_labels(*truth_labels);
  }
}

Partition Partition::from_labels(std::vector<int> labels, std::optional<int> k) {
  if (labels.empty()) throw ValidationError("partition must contain at least one point");
  const int max_label = *std::max_element(labels.begin(), labels.end());
  const int min_label = *std::min_element(labels.begin(), labels.end());
  if (min_label < 0) throw ValidationError("labels must be nonnegative");
  const int clusters = k.value_or(max_label + 1);
  if (clusters < 1) throw ValidationError("k must be positive");
  if (max_label >= clusters) {
    throw ValidationError("label " + std::to_string(max_label) + " out of range for k = " +
                          std::to_string(clusters));
  }
  Partition p;
  p.k_ = clusters;
  p.sizes_.assign(static_cast<std::size_t>(clusters), 0);
  for (int l : labels) ++p.sizes_[static_cast<std::size_t>(l)];
  for (int a = 0; a < clusters; ++a) {
    if (p.sizes_[static_cast<std::size_t>(a)] == 0) throw EmptyCluster(a);
  }
  p.offsets_.assign(static_cast<std::size_t>(clusters) + 1, 0);
  for (int a = 0; a < clusters; ++a) {
    p.offsets_[static_cast<std::size_t>(a) + 1] =
        p.offsets_[static_cast<std::size_t>(a)] + p.sizes_[static_cast<std::size_t>(a)];
  }
  p.order_.assign(labels.size(), 0);
  std::vector<int> cursor(p.offsets_.begin(), p.offsets_.end() - 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    p.order_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(labels[i])]++)] =
        static_cast<int>(i);
  }
  p.labels_ = std::move(labels);
  return p;
}

bool Partition::is_balanced() const noexcept {
  return std::all_of(sizes_.begin(), sizes_.end(), [&](int s) { return s == sizes_.front(); });
}

Partition Partition::canonical() const {
  std::vector<int> remap(static_cast<std::size_t>(k_), -1);
  std::vector<int> out(labels_.size());
  int next = 0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    int& r = remap[static_cast<std::size_t>(labels_[i])];
    if (r < 0) r = next++;
    out[i] = r;
  }
  return from_labels(std::move(out), k_);
}

bool Partition::same_clusters(const Partition& other) const {
  return k_ == other.k_ && canonical().labels_ == other.canonical().labels_;
}

double operator_norm(const Eigen::MatrixXd& block) {
  if (block.size() == 0) return 0.0;
  if (static_cast<double>(block.size()) < kSvdEntryLimit) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(block);
    return svd.singularValues()(0);
  }
  return power_iteration_norm(block);
}

ClusterGeometry compute_geometry(const Dataset& data, const Partition& part) {
  if (part.size() != data.size()) {
    throw DimensionMismatch("partition has " + std::to_string(part.size()) +
                            " labels but dataset has " + std::to_string(data.size()) + " points");
  }
  const int k = part.k();
  const int m = data.dim();
  ClusterGeometry g;
  g.centers = Eigen::MatrixXd::Zero(k, m);
  g.op_norms = Eigen::VectorXd::Zero(k);
  g.frob_sq = Eigen::VectorXd::Zero(k);
  g.sizes = part.sizes();
  g.block_order = part.block_order();
  g.centered_blocks.reserve(static_cast<std::size_t>(k));
  const auto& order = part.block_order();
  for (int a = 0; a < k; ++a) {
    const int n = part.size_of(a);
    if (n == 0) throw EmptyCluster(a);
    Eigen::MatrixXd block(n, m);
    for (int i = 0; i < n; ++i) {
      block.row(i) = data.points.row(order[static_cast<std::size_t>(part.offset(a) + i)]);
    }
    const Eigen::RowVectorXd center = block.colwise().mean();
    block.rowwise() -= center;
    g.centers.row(a) = center;
    g.op_norms(a) = operator_norm(block);
    g.frob_sq(a) = block.squaredNorm();
    g.centered_blocks.push_back(std::move(block));
  }
  g.op_norm_sq_sum = g.op_norms.squaredNorm();
  return g;
}

PairStats compute_pair_stats(const ClusterGeometry& geom) {
  const int k = geom.k();
  if (k < 2) throw ValidationError("pair statistics need at least two clusters");
  PairStats s;
  s.k = k;
  s.h = Eigen::MatrixXd::Zero(k, k);
  s.tau = Eigen::MatrixXd::Zero(k, k);
  s.directions.assign(static_cast<std::size_t>(k * k), Eigen::VectorXd());
  s.projections.assign(static_cast<std::size_t>(k * k), Eigen::VectorXd());
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      const Eigen::VectorXd diff = (geom.centers.row(b) - geom.centers.row(a)).transpose();
      const double h = diff.norm();
      if (!(h > 0.0)) throw CoincidentCenters(a, b);
      s.h(a, b) = s.h(b, a) = h;
      s.directions[s.index(a, b)] = diff / h;
      s.directions[s.index(b, a)] = -diff / h;
    }
  }
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (a == b) continue;
      s.projections[s.index(a, b)] = geom.centered_blocks[static_cast<std::size_t>(a)] * s.w(a, b);
    }
  }
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      s.tau(a, b) = s.tau(b, a) = std::max(s.max_u(a, b), s.max_u(b, a));
    }
  }
  return s;
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd D(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    D(j, j) = 0.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double d = (points.row(i) - points.row(j)).squaredNorm();
      D(i, j) = d;
      D(j, i) = d;
    }
  }
  return D;
}

Eigen::MatrixXd permute_rows(const Eigen::MatrixXd& points, std::span<const int> order) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(order.size()), points.cols());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = points.row(order[i]);
  }
  return out;
}

BlockDistances distance_matrix(const Dataset& data, const Partition& part) {
  if (part.size() != data.size()) {
    throw DimensionMismatch("partition length does not match dataset size");
  }
  BlockDistances out;
  out.order = part.block_order();
  out.D = squared_distances(permute_rows(data.points, out.order));
  return out;
}

}  // namespace kmcert
