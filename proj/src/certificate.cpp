#include "kmcert/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kmcert/errors.hpp"
#include "kmcert/linalg.hpp"

namespace kmcert {

namespace {

constexpr double kRelTol = 1e-8;
constexpr double kAbsFloor = 1e-14;
constexpr double kReconstructionTol = 1e-8;

std::size_t idx(int a) { return static_cast<std::size_t>(a); }

Eigen::MatrixXd stacked_blocks(const ClusterGeometry& g, int N) {
  Eigen::MatrixXd out(N, g.dim());
  int row = 0;
  for (const auto& block : g.centered_blocks) {
    out.middleRows(row, block.rows()) = block;
    row += static_cast<int>(block.rows());
  }
  return out;
}

// B_Tperp with 4 u_ab u_ba^T off the diagonal.
Eigen::MatrixXd b_tperp(const CertificateKernels& K) {
  const int N = K.size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N, N);
  for (int a = 0; a < K.k(); ++a) {
    for (int b = 0; b < K.k(); ++b) {
      if (a == b) continue;
      out.block(K.offsets[idx(a)], K.offsets[idx(b)], K.cluster_size(a), K.cluster_size(b)) =
          4.0 * K.pairs.u(a, b) * K.pairs.u(b, a).transpose();
    }
  }
  return out;
}

// alpha_a = -(2/n_a) D^{aa} 1 + (1/n_a^2) <D^{aa}, J> 1 - (z_a / n_a) 1.
Eigen::VectorXd reconstruct_alpha(const CertificateKernels& K, const Eigen::VectorXd& z_blocks) {
  Eigen::VectorXd alpha(K.size());
  for (int a = 0; a < K.k(); ++a) {
    const int o = K.offsets[idx(a)];
    const int n = K.cluster_size(a);
    const auto Daa = K.D.block(o, o, n, n);
    const double nd = n;
    alpha.segment(o, n) = (-2.0 / nd) * Daa.rowwise().sum();
    alpha.segment(o, n).array() += Daa.sum() / (nd * nd) - z_blocks(a) / nd;
  }
  return alpha;
}

double ideal_objective(const CertificateKernels& K) {
  double total = 0.0;
  for (int a = 0; a < K.k(); ++a) {
    const int o = K.offsets[idx(a)];
    const int n = K.cluster_size(a);
    total += K.D.block(o, o, n, n).sum() / n;
  }
  return total;
}

Eigen::VectorXd per_point(const CertificateKernels& K, const Eigen::VectorXd& z_blocks) {
  Eigen::VectorXd out(K.size());
  for (int a = 0; a < K.k(); ++a) {
    out.segment(K.offsets[idx(a)], K.cluster_size(a)).setConstant(z_blocks(a));
  }
  return out;
}

// B = B_T + B_Tperp off the diagonal with B_T^{ab} = M_T^{ab} - c_ab J.
template <typename Shift>
Eigen::MatrixXd assemble_b(const CertificateKernels& K, const Eigen::MatrixXd& BTp, Shift shift) {
  const int N = K.size();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(N, N);
  for (int a = 0; a < K.k(); ++a) {
    for (int b = 0; b < K.k(); ++b) {
      if (a == b) continue;
      const int oa = K.offsets[idx(a)];
      const int ob = K.offsets[idx(b)];
      const int na = K.cluster_size(a);
      const int nb = K.cluster_size(b);
      B.block(oa, ob, na, nb) = K.M_T.block(oa, ob, na, nb) + BTp.block(oa, ob, na, nb);
      B.block(oa, ob, na, nb).array() -= shift(a, b);
    }
  }
  return B;
}

// The kernels' own partition expressed in block order.
Partition block_partition(const CertificateKernels& K) {
  std::vector<int> labels(static_cast<std::size_t>(K.size()));
  for (int a = 0; a < K.k(); ++a) {
    std::fill_n(labels.begin() + K.offsets[idx(a)], K.cluster_size(a), a);
  }
  return Partition::from_labels(std::move(labels), K.k());
}

void require_balanced(const CertificateKernels& K) {
  const auto& s = K.geom.sizes;
  if (!std::all_of(s.begin(), s.end(), [&](int n) { return n == s.front(); })) {
    throw NotBalanced(s);
  }
}

}  // namespace

std::string to_string(CertificateVariant v) {
  return v == CertificateVariant::PengWei ? "peng_wei" : "balanced";
}

Eigen::MatrixXd project_T(const Eigen::MatrixXd& Z, const std::vector<int>& offsets) {
  return Z - project_Tperp(Z, offsets);
}

Eigen::MatrixXd project_Tperp(const Eigen::MatrixXd& Z, const std::vector<int>& offsets) {
  // (I - X) Z (I - X): subtract block row means, then block column means.
  Eigen::MatrixXd out = Z;
  const std::size_t k = offsets.size() - 1;
  for (std::size_t a = 0; a < k; ++a) {
    const int o = offsets[a];
    const int n = offsets[a + 1] - o;
    const Eigen::RowVectorXd mean = out.middleRows(o, n).colwise().mean();
    out.middleRows(o, n).rowwise() -= mean;
  }
  for (std::size_t b = 0; b < k; ++b) {
    const int o = offsets[b];
    const int n = offsets[b + 1] - o;
    const Eigen::VectorXd mean = out.middleCols(o, n).rowwise().mean();
    out.middleCols(o, n).colwise() -= mean;
  }
  return out;
}

CertificateKernels build_kernels(const Dataset& data, const Partition& part) {
  CertificateKernels K;
  K.geom = compute_geometry(data, part);
  K.pairs = compute_pair_stats(K.geom);
  K.offsets = part.offsets();
  K.D = distance_matrix(data, part).D;

  const int N = part.size();
  const int k = part.k();
  const Eigen::MatrixXd Xbar = stacked_blocks(K.geom, N);
  K.M_Tperp = -2.0 * Xbar * Xbar.transpose();
  K.M_T = Eigen::MatrixXd::Zero(N, N);
  K.E.resize(N, N);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const int oa = K.offsets[idx(a)];
      const int ob = K.offsets[idx(b)];
      const int na = part.size_of(a);
      const int nb = part.size_of(b);
      K.E.block(oa, ob, na, nb).setConstant(0.5 * (1.0 / na + 1.0 / nb));
      if (a == b) continue;
      const double h = K.pairs.h(a, b);
      auto blk = K.M_T.block(oa, ob, na, nb);
      blk.setConstant(h * h);
      blk.colwise() -= 2.0 * h * K.pairs.u(a, b);
      blk.rowwise() -= 2.0 * h * K.pairs.u(b, a).transpose();
    }
  }
  K.M = K.M_T + K.M_Tperp;

  if (part.is_balanced()) {
    const double n = part.size_of(0);
    K.F.resize(N, N);
    for (int a = 0; a < k; ++a) {
      const double za = 2.0 * k * K.geom.op_norms(a) * K.geom.op_norms(a);
      for (int b = 0; b < k; ++b) {
        const double zb = 2.0 * k * K.geom.op_norms(b) * K.geom.op_norms(b);
        auto blk = K.F.block(K.offsets[idx(a)], K.offsets[idx(b)], part.size_of(a), part.size_of(b));
        if (a == b) {
          blk.setConstant(-za / n);
          blk.diagonal().array() += za;
        } else {
          blk.setConstant(-(za + zb) / (2.0 * n));
        }
      }
    }
  }
  return K;
}

DualCertificate build_certificate_pw(const CertificateKernels& K) {
  if (K.k() < 2) throw ValidationError("certificate construction needs k >= 2");
  const int N = K.size();
  DualCertificate c;
  c.variant = CertificateVariant::PengWei;
  const Eigen::MatrixXd BTp = b_tperp(K);
  c.z = sym_operator_norm(symmetrized(K.M_Tperp - BTp));
  c.B = assemble_b(K, BTp, [&](int a, int b) {
    const double na = K.cluster_size(a);
    const double nb = K.cluster_size(b);
    return c.z * (na + nb) / (2.0 * na * nb);
  });
  c.Q = c.z * (Eigen::MatrixXd::Identity(N, N) - K.E) + K.M - c.B;
  c.z_blocks = Eigen::VectorXd::Constant(K.k(), c.z);
  c.alpha = reconstruct_alpha(K, c.z_blocks);
  c.primal_objective = ideal_objective(K);
  c.dual_objective = -K.k() * c.z - c.alpha.sum();
  c.verdicts = verify_certificate(c, K, block_partition(K));
  return c;
}

DualCertificate build_certificate_pw(const Dataset& data, const Partition& part) {
  return build_certificate_pw(build_kernels(data, part));
}

DualCertificate build_certificate_balanced(const CertificateKernels& K) {
  if (K.k() < 2) throw ValidationError("certificate construction needs k >= 2");
  require_balanced(K);
  const double n = K.cluster_size(0);
  DualCertificate c;
  c.variant = CertificateVariant::Balanced;
  c.z_blocks = 2.0 * K.k() * K.geom.op_norms.cwiseAbs2();
  const Eigen::MatrixXd BTp = b_tperp(K);
  c.B = assemble_b(K, BTp, [&](int a, int b) { return (c.z_blocks(a) + c.z_blocks(b)) / (2.0 * n); });
  c.Q = K.F + K.M - c.B;
  c.alpha = reconstruct_alpha(K, c.z_blocks);
  c.primal_objective = ideal_objective(K);
  c.dual_objective = -(per_point(K, c.z_blocks) / n + c.alpha).sum();
  c.verdicts = verify_certificate(c, K, block_partition(K));
  return c;
}

DualCertificate build_certificate_balanced(const Dataset& data, const Partition& part) {
  if (!part.is_balanced()) throw NotBalanced(part.sizes());
  return build_certificate_balanced(build_kernels(data, part));
}

CertificateVerdicts verify_certificate(const DualCertificate& cert, const CertificateKernels& K,
                                       const Partition& part) {
  const int N = K.size();
  if (part.size() != N || part.k() != K.k() || part.sizes() != K.geom.sizes ||
      cert.B.rows() != N || cert.B.cols() != N || cert.Q.rows() != N || cert.Q.cols() != N ||
      cert.alpha.size() != N || cert.z_blocks.size() != K.k()) {
    throw MismatchedInputs("certificate, kernels and partition do not describe the same problem");
  }
  const auto& off = part.offsets();
  const int k = part.k();

  CertificateVerdicts v;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(cert.Q), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  v.q_min_eig = ev(0);
  v.q_norm = std::max(std::abs(ev(0)), std::abs(ev(N - 1)));

  v.b_min_offdiag = std::numeric_limits<double>::infinity();
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const auto blk = cert.B.block(off[idx(a)], off[idx(b)], part.size_of(a), part.size_of(b));
      if (a == b) {
        v.b_max_diag = std::max(v.b_max_diag, blk.cwiseAbs().maxCoeff());
      } else {
        v.b_min_offdiag = std::min(v.b_min_offdiag, blk.minCoeff());
      }
      const auto qblk = cert.Q.block(off[idx(a)], off[idx(b)], part.size_of(a), part.size_of(b));
      v.q_row_annihilation = std::max(v.q_row_annihilation, qblk.rowwise().sum().cwiseAbs().maxCoeff());
    }
  }

  const double d_scale = std::max(1.0, K.D.cwiseAbs().maxCoeff());
  Eigen::MatrixXd rhs = K.D;
  rhs.colwise() += 0.5 * cert.alpha;
  rhs.rowwise() += 0.5 * cert.alpha.transpose();
  if (cert.variant == CertificateVariant::PengWei) {
    rhs.diagonal().array() += cert.z;
  } else {
    rhs.diagonal() += per_point(K, cert.z_blocks);
  }
  v.reconstruction_error = (cert.B + cert.Q - rhs).cwiseAbs().maxCoeff() / d_scale;
  v.reconstruction_ok = v.reconstruction_error <= kReconstructionTol;

  v.tolerance = kRelTol * v.q_norm + kAbsFloor * d_scale;
  const bool q_ok = v.q_min_eig >= -v.tolerance && v.q_row_annihilation <= v.tolerance &&
                    v.b_max_diag == 0.0;
  v.optimal = q_ok && v.b_min_offdiag >= 0.0;
  v.valid = q_ok && v.b_min_offdiag > 0.0;
  return v;
}

}  // namespace kmcert
