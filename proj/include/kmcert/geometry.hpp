#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace kmcert {

/// N points in R^m stored row-wise, with an optional ground-truth labeling.
struct Dataset {
  Eigen::MatrixXd points;
  std::optional<std::vector<int>> truth_labels;

  int size() const noexcept { return static_cast<int>(points.rows()); }
  int dim() const noexcept { return static_cast<int>(points.cols()); }

  /// Throws ValidationError if the invariants (N, m >= 1, finite coordinates,
  /// contiguous nonempty truth labels) do not hold.
  void validate() const;
};

/// Assignment of N points into k nonempty clusters labelled 0..k-1.
class Partition {
public:
  /// k defaults to max(label) + 1.
  static Partition from_labels(std::vector<int> labels, std::optional<int> k = std::nullopt);

  const std::vector<int>& labels() const noexcept { return labels_; }
  int k() const noexcept { return k_; }
  int size() const noexcept { return static_cast<int>(labels_.size()); }
  const std::vector<int>& sizes() const noexcept { return sizes_; }
  int size_of(int a) const { return sizes_.at(static_cast<std::size_t>(a)); }

  /// Original point indices grouped cluster by cluster, ascending within a cluster.
  const std::vector<int>& block_order() const noexcept { return order_; }
  /// Offset of cluster a's first row in block order; offsets()[k] == N.
  const std::vector<int>& offsets() const noexcept { return offsets_; }
  int offset(int a) const { return offsets_.at(static_cast<std::size_t>(a)); }

  bool is_balanced() const noexcept;

  /// Relabels clusters by order of first appearance. The induced set partition is unchanged.
  Partition canonical() const;

  /// True if both describe the same set partition (labels may be permuted).
  bool same_clusters(const Partition& other) const;

  friend bool operator==(const Partition&, const Partition&) = default;

private:
  Partition() = default;
  std::vector<int> labels_;
  int k_ = 0;
  std::vector<int> sizes_;
  std::vector<int> order_;
  std::vector<int> offsets_;
};

/// Per-cluster statistics: centers c_a, centered blocks, operator and Frobenius norms.
struct ClusterGeometry {
  Eigen::MatrixXd centers;                     // k x m
  std::vector<Eigen::MatrixXd> centered_blocks;  // n_a x m, rows in block order
  Eigen::VectorXd op_norms;                    // largest singular value of each block
  double op_norm_sq_sum = 0.0;                 // sum_l ||Xbar_l||^2
  Eigen::VectorXd frob_sq;                     // ||Xbar_a||_F^2
  std::vector<int> sizes;
  std::vector<int> block_order;

  int k() const noexcept { return static_cast<int>(centers.rows()); }
  int dim() const noexcept { return static_cast<int>(centers.cols()); }
};

/// Pairwise statistics between clusters. w and u are stored for every ordered pair.
struct PairStats {
  Eigen::MatrixXd h;    // ||c_a - c_b||
  Eigen::MatrixXd tau;  // max{max u_ab, max u_ba}
  int k = 0;
  // Row-major k*k tables; diagonal entries are empty vectors.
  std::vector<Eigen::VectorXd> directions;
  std::vector<Eigen::VectorXd> projections;

  /// Unit vector pointing from c_a to c_b.
  const Eigen::VectorXd& w(int a, int b) const { return directions.at(index(a, b)); }
  /// Signed projections Xbar_a w_ab, one entry per point of cluster a.
  const Eigen::VectorXd& u(int a, int b) const { return projections.at(index(a, b)); }
  double max_u(int a, int b) const { return u(a, b).maxCoeff(); }

  std::size_t index(int a, int b) const { return static_cast<std::size_t>(a * k + b); }
};

/// Squared distance matrix in block order, plus the permutation that produced it.
struct BlockDistances {
  Eigen::MatrixXd D;
  std::vector<int> order;  // D(i, j) = ||x_{order[i]} - x_{order[j]}||^2
};

/// Operator norm of a dense block: full SVD for small blocks, power iteration otherwise.
double operator_norm(const Eigen::MatrixXd& block);

ClusterGeometry compute_geometry(const Dataset& data, const Partition& part);

PairStats compute_pair_stats(const ClusterGeometry& geom);

BlockDistances distance_matrix(const Dataset& data, const Partition& part);

/// Squared distance matrix in the dataset's own point order.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& points);

/// Rows of `points` reordered by `order`.
Eigen::MatrixXd permute_rows(const Eigen::MatrixXd& points, std::span<const int> order);

}  // namespace kmcert
