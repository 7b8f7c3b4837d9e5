#include "kmcert/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kmcert/errors.hpp"
#include "kmcert/random.hpp"

namespace kmcert {

namespace {

constexpr double kTieTol = 1e-12;

// Objective of a labeling from per-cluster sums: sum_a (sum ||x||^2 - ||sum x||^2 / n_a).
double labeling_objective(const Eigen::MatrixXd& P, const std::vector<int>& labels, int k) {
  const Eigen::Index m = P.cols();
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, m);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(k);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int a = labels[i];
    sums.row(a) += P.row(static_cast<Eigen::Index>(i));
    sq(a) += P.row(static_cast<Eigen::Index>(i)).squaredNorm();
    ++counts[static_cast<std::size_t>(a)];
  }
  double total = 0.0;
  for (int a = 0; a < k; ++a) {
    total += sq(a) - sums.row(a).squaredNorm() / counts[static_cast<std::size_t>(a)];
  }
  return std::max(total, 0.0);
}

// Within-cluster squared deviation computed from centered coordinates (stable).
double centered_objective(const Eigen::MatrixXd& P, const std::vector<int>& labels, int k) {
  const Eigen::Index m = P.cols();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, m);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    c.row(labels[i]) += P.row(static_cast<Eigen::Index>(i));
    ++counts[static_cast<std::size_t>(labels[i])];
  }
  for (int a = 0; a < k; ++a) {
    if (counts[static_cast<std::size_t>(a)] > 0) c.row(a) /= counts[static_cast<std::size_t>(a)];
  }
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    total += (P.row(static_cast<Eigen::Index>(i)) - c.row(labels[i])).squaredNorm();
  }
  return total;
}

}  // namespace

double stirling2(int n, int k) {
  if (n < 0 || k < 0) return 0.0;
  if (k > n) return 0.0;
  std::vector<double> row(static_cast<std::size_t>(k) + 1, 0.0);
  row[0] = 1.0;  // S(0, 0)
  for (int i = 1; i <= n; ++i) {
    for (int j = std::min(i, k); j >= 1; --j) {
      row[static_cast<std::size_t>(j)] =
          j * row[static_cast<std::size_t>(j)] + row[static_cast<std::size_t>(j) - 1];
    }
    row[0] = 0.0;
  }
  return row[static_cast<std::size_t>(k)];
}

BruteForceResult brute_force_kmeans(const Dataset& data, int k, double limit) {
  data.validate();
  const int N = data.size();
  if (k < 1 || k > N) {
    throw ValidationError("k = " + std::to_string(k) + " outside 1.." + std::to_string(N));
  }
  const double count = stirling2(N, k);
  if (count > limit) throw TooLarge(count, limit);

  // Center the data once; the objective is translation invariant.
  const Eigen::RowVectorXd mean = data.points.colwise().mean();
  const Eigen::MatrixXd P = data.points.rowwise() - mean;

  // Restricted-growth strings: s[0] = 0, s[i] <= 1 + max(s[0..i-1]), using exactly k labels.
  std::vector<int> s(static_cast<std::size_t>(N), 0);
  std::vector<int> prefix_max(static_cast<std::size_t>(N), 0);
  std::vector<int> best;
  double best_obj = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  std::uint64_t enumerated = 0;

  // Start at the lexicographically first string with k labels: 0...0,1,2,...,k-1.
  for (int i = 0; i < N; ++i) {
    s[static_cast<std::size_t>(i)] = std::max(0, i - (N - k));
  }
  auto recompute_prefix = [&](int from) {
    for (int i = from; i < N; ++i) {
      const int prev = i == 0 ? -1 : prefix_max[static_cast<std::size_t>(i) - 1];
      prefix_max[static_cast<std::size_t>(i)] = std::max(prev, s[static_cast<std::size_t>(i)]);
    }
  };
  recompute_prefix(0);

  while (true) {
    ++enumerated;
    const double obj = labeling_objective(P, s, k);
    if (obj < best_obj) {
      second = best_obj;
      best_obj = obj;
      best = s;
    } else if (obj < second) {
      second = obj;
    }

    // Lexicographic successor among restricted-growth strings using all k labels:
    // bump the rightmost position that still admits a completion, then fill the
    // tail with zeros followed by the labels not yet introduced.
    bool advanced = false;
    for (int i = N - 1; i >= 1 && !advanced; --i) {
      const int pm = prefix_max[static_cast<std::size_t>(i) - 1];
      const int cap = std::min(k - 1, pm + 1);
      const int tail = N - 1 - i;
      int v = s[static_cast<std::size_t>(i)] + 1;
      while (v <= cap && tail < k - 1 - std::max(pm, v)) ++v;
      if (v > cap) continue;
      s[static_cast<std::size_t>(i)] = v;
      const int missing = k - 1 - std::max(pm, v);
      for (int j = i + 1; j < N; ++j) {
        const int from_end = N - j;
        s[static_cast<std::size_t>(j)] = from_end <= missing ? k - from_end : 0;
      }
      recompute_prefix(i);
      advanced = true;
    }
    if (!advanced) break;
  }

  // Recompute the winner's objective from centered coordinates for reporting.
  BruteForceResult r{Partition::from_labels(best, k), centered_objective(P, best, k), second, false,
                     enumerated};
  const double tol = kTieTol * std::max(1.0, std::abs(best_obj));
  r.unique = !(second - best_obj <= tol);
  return r;
}

LloydResult lloyd_detailed(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                           int max_iter) {
  const int N = static_cast<int>(points.rows());
  const Eigen::Index m = points.cols();
  if (k < 1 || k > N) {
    throw ValidationError("k = " + std::to_string(k) + " outside 1.." + std::to_string(N));
  }
  Philox rng(seed, stream_id(0x11071d));

  // k-means++ seeding.
  Eigen::MatrixXd centers(k, m);
  centers.row(0) = points.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(N))));
  Eigen::VectorXd d2 = (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = N - 1;
      for (Eigen::Index i = 0; i < N; ++i) {
        acc += d2(i);
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(N)));
    }
    centers.row(c) = points.row(pick);
    d2 = d2.cwiseMin((points.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<int> labels(static_cast<std::size_t>(N), -1);
  LloydResult r{Partition::from_labels(std::vector<int>(static_cast<std::size_t>(N), 0), 1),
                centers, 0.0, 0, false, {}};
  Eigen::VectorXd dist(N);
  for (int it = 1; it <= max_iter; ++it) {
    bool changed = false;
    for (int i = 0; i < N; ++i) {
      Eigen::Index best = 0;
      const double d = (centers.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
      dist(i) = d;
      if (labels[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    // Repair empty clusters with the point farthest from its own center.
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < N; ++i) {
        if (counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] < 2) continue;
        if (far < 0 || dist(i) > dist(far)) far = i;
      }
      --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
      labels[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      dist(far) = 0.0;
      changed = true;
    }
    r.iterations = it;
    r.objective_trace.push_back(centered_objective(points, labels, k));

    centers.setZero();
    for (int i = 0; i < N; ++i) centers.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
    for (int c = 0; c < k; ++c) centers.row(c) /= counts[static_cast<std::size_t>(c)];

    if (!changed) {
      r.stabilized = true;
      break;
    }
  }
  r.part = Partition::from_labels(labels, k);
  r.centers = centers;
  r.objective = centered_objective(points, labels, k);
  return r;
}

Partition lloyd(const Dataset& data, int k, std::uint64_t seed, int max_iter) {
  data.validate();
  return lloyd_detailed(data.points, k, seed, max_iter).part;
}

}  // namespace kmcert
