#include <cmath>
#include <numeric>
#include <string>

#include "kmcert/baselines.hpp"
#include "kmcert/sdp.hpp"

namespace kmcert {

namespace {

int find_root(std::vector<int>& parent, int i) {
  while (parent[static_cast<std::size_t>(i)] != i) {
    parent[static_cast<std::size_t>(i)] =
        parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
    i = parent[static_cast<std::size_t>(i)];
  }
  return i;
}

}  // namespace

RoundedPartition round_solution(const Eigen::MatrixXd& Z, int k, const std::optional<Partition>& ref,
                                const RoundingOptions& opts) {
  const int N = static_cast<int>(Z.rows());
  if (N < 1 || Z.cols() != N) throw DimensionMismatch("Z must be a nonempty square matrix");
  if (k < 1 || k > N) throw ValidationError("k = " + std::to_string(k) + " outside 1.." + std::to_string(N));
  if (ref && (ref->size() != N || ref->k() != k)) {
    throw MismatchedInputs("reference partition does not match Z and k");
  }

  const double theta = 1.0 / (2.0 * N);
  std::vector<int> parent(static_cast<std::size_t>(N));
  std::iota(parent.begin(), parent.end(), 0);
  for (int j = 0; j < N; ++j) {
    for (int i = j + 1; i < N; ++i) {
      if (0.5 * (Z(i, j) + Z(j, i)) > theta) {
        const int ri = find_root(parent, i);
        const int rj = find_root(parent, j);
        if (ri != rj) parent[static_cast<std::size_t>(std::max(ri, rj))] = std::min(ri, rj);
      }
    }
  }
  std::vector<int> labels(static_cast<std::size_t>(N));
  std::vector<int> remap(static_cast<std::size_t>(N), -1);
  int components = 0;
  for (int i = 0; i < N; ++i) {
    int& r = remap[static_cast<std::size_t>(find_root(parent, i))];
    if (r < 0) r = components++;
    labels[static_cast<std::size_t>(i)] = r;
  }

  bool fallback = false;
  Partition part = [&] {
    if (components == k) return Partition::from_labels(labels, k);
    fallback = true;
    const LloydResult lr = lloyd_detailed(Z, k, opts.seed, opts.lloyd_max_iter);
    if (!lr.stabilized) {
      throw RoundingAmbiguous("threshold graph has " + std::to_string(components) +
                              " components for k = " + std::to_string(k) +
                              " and the Lloyd fallback did not stabilize");
    }
    return lr.part.canonical();
  }();

  const Eigen::MatrixXd X = membership_matrix(ref ? *ref : part);
  RoundedPartition out{part, (Z - X).norm() / X.norm(), false, fallback};
  out.exact = out.recovery_distance <= opts.eps_rec;
  return out;
}

double kmeans_objective(const Dataset& data, const Partition& part) {
  const ClusterGeometry g = compute_geometry(data, part);
  const double objective = g.frob_sq.sum();
  if (data.size() <= 2000) {
    const double half = 0.5 * membership_matrix(part).cwiseProduct(squared_distances(data.points)).sum();
    if (std::abs(objective - half) > 1e-9 * (1.0 + objective)) {
      throw std::logic_error("k-means objective disagrees with (1/2)<X, D>");
    }
  }
  return objective;
}

}  // namespace kmcert
