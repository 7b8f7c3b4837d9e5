#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kmcert/geometry.hpp"

namespace kmcert {

/// Closed-form kernel matrices for a fixed (data, partition), all in block order.
///
/// M_T^{ab} = h^2 J - 2h u_ab 1^T - 2h 1 u_ba^T for a != b and zero on diagonal
/// blocks; M_Tperp^{ab} = -2 Xbar_a Xbar_b^T; M = M_T + M_Tperp.
struct CertificateKernels {
  ClusterGeometry geom;
  PairStats pairs;
  std::vector<int> offsets;  // block boundaries, length k + 1
  Eigen::MatrixXd D;         // squared distances
  Eigen::MatrixXd M;
  Eigen::MatrixXd M_T;
  Eigen::MatrixXd M_Tperp;
  Eigen::MatrixXd E;
  Eigen::MatrixXd F;  // balanced partitions only, with z_a = 2k ||Xbar_a||^2; empty otherwise

  int size() const noexcept { return static_cast<int>(D.rows()); }
  int k() const noexcept { return geom.k(); }
  int cluster_size(int a) const { return geom.sizes.at(static_cast<std::size_t>(a)); }
};

CertificateKernels build_kernels(const Dataset& data, const Partition& part);

/// Blockwise projections onto T and its orthogonal complement for the partition's X.
Eigen::MatrixXd project_T(const Eigen::MatrixXd& Z, const std::vector<int>& offsets);
Eigen::MatrixXd project_Tperp(const Eigen::MatrixXd& Z, const std::vector<int>& offsets);

enum class CertificateVariant { PengWei, Balanced };

std::string to_string(CertificateVariant v);

struct CertificateVerdicts {
  double q_min_eig = 0.0;
  double q_norm = 0.0;                // spectral norm of Q
  double b_min_offdiag = 0.0;         // smallest entry over off-diagonal blocks of B
  double b_max_diag = 0.0;            // largest |entry| over diagonal blocks of B
  double q_row_annihilation = 0.0;    // max over blocks of ||Q^{ab} 1||_inf
  double reconstruction_error = 0.0;  // ||B + Q - D - A*(lambda)||_max / max(1, max D)
  double tolerance = 0.0;             // threshold applied to q_min_eig and annihilation
  bool optimal = false;               // Q psd, B >= 0, QX = 0: X is a global optimum
  bool valid = false;                 // additionally B > 0 off-diagonal: X is the unique optimum
  bool reconstruction_ok = false;
};

/// Dual certificate (z, B, Q) and the reconstructed alpha, all in block order.
///
/// An invalid verdict only means this particular construction failed; it does
/// not show that X is suboptimal.
struct DualCertificate {
  CertificateVariant variant = CertificateVariant::PengWei;
  double z = 0.0;            // Peng-Wei scalar
  Eigen::VectorXd z_blocks;  // balanced per-cluster z_a
  Eigen::MatrixXd B;
  Eigen::MatrixXd Q;
  Eigen::VectorXd alpha;
  double primal_objective = 0.0;  // <D, X>
  double dual_objective = 0.0;    // -k z - <alpha, 1>, or -<z/n + alpha, 1>
  CertificateVerdicts verdicts;

  double duality_gap() const noexcept { return primal_objective - dual_objective; }
};

/// Peng-Wei construction: B_Tperp^{ab} = 4 u_ab u_ba^T, z = ||M_Tperp - B_Tperp||.
DualCertificate build_certificate_pw(const CertificateKernels& kernels);
DualCertificate build_certificate_pw(const Dataset& data, const Partition& part);

/// Amini-Levina construction: z_a = 2k ||Xbar_a||^2. Throws NotBalanced.
DualCertificate build_certificate_balanced(const CertificateKernels& kernels);
DualCertificate build_certificate_balanced(const Dataset& data, const Partition& part);

/// Recomputes every verdict from (B, Q, alpha, z). Throws MismatchedInputs when
/// the certificate, kernels and partition disagree in shape.
CertificateVerdicts verify_certificate(const DualCertificate& cert, const CertificateKernels& kernels,
                                       const Partition& part);

}  // namespace kmcert
