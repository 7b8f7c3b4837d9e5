#pragma once

#include <Eigen/Dense>

namespace kmcert {

/// Smallest eigenvalue of a symmetric matrix (lower triangle is read).
double sym_min_eigenvalue(const Eigen::MatrixXd& S);

/// Spectral norm of a symmetric matrix, max |lambda|.
double sym_operator_norm(const Eigen::MatrixXd& S);

/// Nearest PSD matrix in Frobenius norm: eigendecompose, clamp negative eigenvalues.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& S);

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& A) {
  return 0.5 * (A + A.transpose());
}

}  // namespace kmcert
