#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "kmcert/errors.hpp"
#include "kmcert/geometry.hpp"

namespace kmcert {

enum class Relaxation { PengWei, AminiLevina };

std::string to_string(Relaxation r);
Relaxation relaxation_from_string(const std::string& s);

/// min <D, Z> over Z psd, Z >= 0, Z 1 = 1 and either Tr Z = k (Peng-Wei) or
/// diag Z = 1/n (Amini-Levina, N = n k).
///
/// Z is indexed in the same order as the rows of D.
struct SdpProblem {
  Eigen::MatrixXd D;
  int k = 0;
  Relaxation variant = Relaxation::PengWei;

  int size() const noexcept { return static_cast<int>(D.rows()); }
  /// Cluster size n for Amini-Levina; N / k.
  int balanced_size() const noexcept { return k > 0 ? size() / k : 0; }

  /// Throws InvalidProblem on asymmetric, negative or non-finite D, bad k, or N not divisible by k
  /// for Amini-Levina.
  void validate() const;
};

struct SolverOptions {
  int max_iter = 50000;
  double tol_primal = 1e-7;  // absolute, on every residual of the returned Z
  double tol_obj = 1e-9;     // relative change of the objective between checks
  int size_cap = 400;
  /// Initial penalty for the cost normalized to max |D| = 1. Non-positive picks the default.
  double rho0 = 0.0;
  double rho_factor = 2.0;
  double rho_ratio = 3.0;
  int adapt_every = 10;  // first rho update; the wait doubles after every change
  double relaxation = 1.6;  // over-relaxation factor in (0, 2)
};

/// Constraint violations measured on a specific Z.
struct Residuals {
  double psd_violation = 0.0;     // max(0, -lambda_min)
  double nonneg_violation = 0.0;  // max(0, -min entry)
  double rowsum_violation = 0.0;  // max |Z 1 - 1|
  double trace_violation = 0.0;   // |Tr Z - k|, or max |diag Z - 1/n|

  double max() const noexcept;
};

struct SdpSolution {
  Eigen::MatrixXd Z;
  double objective = 0.0;
  Residuals residuals;
  int iterations = 0;
  bool converged = false;
};

/// The solver stopped before meeting its tolerances. best() is the iterate with
/// the smallest measured residual.
class NotConverged : public Error {
public:
  explicit NotConverged(SdpSolution best);
  const SdpSolution& best() const noexcept { return best_; }

private:
  SdpSolution best_;
};

Residuals measure_residuals(const Eigen::MatrixXd& Z, const SdpProblem& prob);

/// Consensus ADMM over the PSD cone, the nonnegative orthant and the affine set.
/// Throws NotConverged (carrying the best iterate) or InvalidProblem.
SdpSolution solve(const SdpProblem& prob, const SolverOptions& opts = {});

/// sum_a (1/n_a) 1_a 1_a^T in block order.
Eigen::MatrixXd ideal_solution(const Partition& part);

/// The same matrix indexed by original point order: X_ij = 1/n_a when i, j share cluster a.
Eigen::MatrixXd membership_matrix(const Partition& part);

struct RoundingOptions {
  double eps_rec = 1e-3;
  std::uint64_t seed = 0;
  int lloyd_max_iter = 100;
};

struct RoundedPartition {
  Partition part;
  double recovery_distance = 0.0;  // ||Z - X||_F / ||X||_F
  bool exact = false;
  bool used_fallback = false;
};

/// Reads a partition off Z (point order). Connected components of {Z_ij > 1/(2N)}
/// are used when there are exactly k of them; otherwise Lloyd's algorithm runs on
/// the rows of Z. Throws RoundingAmbiguous if that fallback does not stabilize.
RoundedPartition round_solution(const Eigen::MatrixXd& Z, int k,
                                const std::optional<Partition>& ref = std::nullopt,
                                const RoundingOptions& opts = {});

/// sum_a sum_{l in a} ||x_l - c_a||^2, which equals (1/2) <X, D>.
double kmeans_objective(const Dataset& data, const Partition& part);

}  // namespace kmcert
