#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "kmcert/geometry.hpp"

namespace kmcert {

/// Stirling number of the second kind S(n, k), as a double (saturates to +inf).
double stirling2(int n, int k);

struct BruteForceResult {
  Partition best_partition;
  double best_objective = 0.0;
  double second_objective = 0.0;  // best value among the other partitions (+inf if none)
  bool unique = false;
  std::uint64_t partitions_enumerated = 0;
};

/// Exhaustive k-means over all set partitions into exactly k nonempty clusters,
/// enumerated as restricted-growth strings. Throws TooLarge when S(N, k) > limit.
BruteForceResult brute_force_kmeans(const Dataset& data, int k, double limit = 1e7);

struct LloydResult {
  Partition part;
  Eigen::MatrixXd centers;
  double objective = 0.0;
  int iterations = 0;
  bool stabilized = false;
  std::vector<double> objective_trace;  // objective after each assignment step
};

/// Lloyd's algorithm with k-means++ seeding. Empty clusters are reseeded at the
/// point farthest from its current center.
LloydResult lloyd_detailed(const Eigen::MatrixXd& points, int k, std::uint64_t seed = 0,
                           int max_iter = 300);

Partition lloyd(const Dataset& data, int k, std::uint64_t seed = 0, int max_iter = 300);

}  // namespace kmcert
