#pragma once

// Reference computations used as test oracles. They intentionally avoid the
// library's closed forms: everything is rebuilt from raw coordinates with loops.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "kmcert/geometry.hpp"

namespace kmcert::oracle {

inline Dataset ex1() {
  Dataset d;
  d.points.resize(4, 2);
  d.points << 0, 0, 2, 0, 5, 0, 7, 0;
  d.truth_labels = std::vector<int>{0, 0, 1, 1};
  return d;
}

inline Partition ex1_partition() { return Partition::from_labels({0, 0, 1, 1}); }

/// Points of cluster a, in ascending original index.
inline std::vector<Eigen::VectorXd> cluster_points(const Dataset& d, const std::vector<int>& labels, int a) {
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < d.size(); ++i) {
    if (labels[static_cast<std::size_t>(i)] == a) out.push_back(d.points.row(i).transpose());
  }
  return out;
}

inline Eigen::VectorXd mean_of(const std::vector<Eigen::VectorXd>& pts) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(pts.front().size());
  for (const auto& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

/// min over both clusters of <x - (c_a + c_b)/2, direction pointing away from x's own center>.
inline double bisector_margin(const Dataset& d, const std::vector<int>& labels, int a, int b) {
  const auto pa = cluster_points(d, labels, a);
  const auto pb = cluster_points(d, labels, b);
  const Eigen::VectorXd ca = mean_of(pa);
  const Eigen::VectorXd cb = mean_of(pb);
  const Eigen::VectorXd mid = 0.5 * (ca + cb);
  const Eigen::VectorXd w_ba = (ca - cb).normalized();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : pa) best = std::min(best, (x - mid).dot(w_ba));
  for (const auto& x : pb) best = std::min(best, (x - mid).dot(-w_ba));
  return best;
}

/// Squared distances in block order, by explicit loops.
inline Eigen::MatrixXd block_distances(const Dataset& d, const std::vector<int>& labels, int k,
                                       std::vector<int>* offsets = nullptr) {
  std::vector<Eigen::VectorXd> pts;
  std::vector<int> offs{0};
  for (int a = 0; a < k; ++a) {
    for (auto& p : cluster_points(d, labels, a)) pts.push_back(p);
    offs.push_back(static_cast<int>(pts.size()));
  }
  const int N = static_cast<int>(pts.size());
  Eigen::MatrixXd D(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      double s = 0.0;
      for (Eigen::Index c = 0; c < pts[0].size(); ++c) {
        const double diff = pts[static_cast<std::size_t>(i)](c) - pts[static_cast<std::size_t>(j)](c);
        s += diff * diff;
      }
      D(i, j) = s;
    }
  }
  if (offsets) *offsets = offs;
  return D;
}

/// M assembled block by block from D.
inline Eigen::MatrixXd m_from_distances(const Eigen::MatrixXd& D, const std::vector<int>& offs) {
  const int k = static_cast<int>(offs.size()) - 1;
  const int N = static_cast<int>(D.rows());
  Eigen::MatrixXd M(N, N);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const int oa = offs[a], ob = offs[b];
      const int na = offs[a + 1] - oa, nb = offs[b + 1] - ob;
      const Eigen::MatrixXd Daa = D.block(oa, oa, na, na);
      const Eigen::MatrixXd Dbb = D.block(ob, ob, nb, nb);
      const Eigen::MatrixXd Dab = D.block(oa, ob, na, nb);
      if (a == b) {
        const Eigen::MatrixXd P =
            Eigen::MatrixXd::Identity(na, na) - Eigen::MatrixXd::Constant(na, na, 1.0 / na);
        M.block(oa, ob, na, nb) = P * Daa * P;
        continue;
      }
      const Eigen::MatrixXd Jab = Eigen::MatrixXd::Ones(na, nb);
      const double s = 0.5 * (Daa.sum() / (double(na) * na) + Dbb.sum() / (double(nb) * nb));
      M.block(oa, ob, na, nb) = Dab - (Daa * Jab / na + Jab * Dbb / nb) + s * Jab;
    }
  }
  return M;
}

/// Block T-perp projection with explicit centering matrices.
inline Eigen::MatrixXd tperp(const Eigen::MatrixXd& Z, const std::vector<int>& offs) {
  const int k = static_cast<int>(offs.size()) - 1;
  Eigen::MatrixXd out(Z.rows(), Z.cols());
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const int na = offs[a + 1] - offs[a], nb = offs[b + 1] - offs[b];
      const Eigen::MatrixXd Pa =
          Eigen::MatrixXd::Identity(na, na) - Eigen::MatrixXd::Constant(na, na, 1.0 / na);
      const Eigen::MatrixXd Pb =
          Eigen::MatrixXd::Identity(nb, nb) - Eigen::MatrixXd::Constant(nb, nb, 1.0 / nb);
      out.block(offs[a], offs[b], na, nb) = Pa * Z.block(offs[a], offs[b], na, nb) * Pb;
    }
  }
  return out;
}

inline double k_means_cost(const Dataset& d, const std::vector<int>& labels, int k) {
  double total = 0.0;
  for (int a = 0; a < k; ++a) {
    const auto pts = cluster_points(d, labels, a);
    const Eigen::VectorXd c = mean_of(pts);
    for (const auto& p : pts) total += (p - c).squaredNorm();
  }
  return total;
}

/// Random clustered dataset: k Gaussian blobs with distinct random centers and
/// every cluster nonempty. Labels are shuffled so clusters are interleaved.
inline Dataset random_instance(std::mt19937_64& rng, int N, int k, int m, double spread = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd centers(k, m);
  for (int a = 0; a < k; ++a)
    for (int c = 0; c < m; ++c) centers(a, c) = 4.0 * gauss(rng);
  std::vector<int> labels(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) labels[static_cast<std::size_t>(i)] = i < k ? i : int(rng() % k);
  std::shuffle(labels.begin(), labels.end(), rng);
  Dataset d;
  d.points.resize(N, m);
  for (int i = 0; i < N; ++i) {
    for (int c = 0; c < m; ++c) {
      d.points(i, c) = centers(labels[static_cast<std::size_t>(i)], c) + spread * gauss(rng);
    }
  }
  d.truth_labels = labels;
  return d;
}

inline double rel_diff(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  return (A - B).cwiseAbs().maxCoeff() / std::max(1.0, B.cwiseAbs().maxCoeff());
}

}  // namespace kmcert::oracle
