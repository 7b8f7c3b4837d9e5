#include "kmcert/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kmcert/linalg.hpp"

namespace kmcert {

namespace {

constexpr double kDefaultRho = 1.0;
constexpr double kSymTol = 1e-12;
constexpr double kPolishWindow = 3.0;
constexpr int kPolishEvery = 10;

// Projection onto {Z symmetric : Z 1 = 1, Tr Z = k} or {Z 1 = 1, diag Z = 1/n}.
// Z - A*(y) with (A A*) y = A(Z) - b, the Gram inverse precomputed once.
class AffineProjector {
public:
  explicit AffineProjector(const SdpProblem& prob)
      : variant_(prob.variant), n_(prob.size()), k_(prob.k) {
    const Eigen::Index N = n_;
    const Eigen::Index dim = variant_ == Relaxation::PengWei ? N + 1 : 2 * N;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dim, dim);
    G.topLeftCorner(N, N).setConstant(0.5);
    G.topLeftCorner(N, N).diagonal().array() += 0.5 * static_cast<double>(N);
    if (variant_ == Relaxation::PengWei) {
      G.block(0, N, N, 1).setOnes();
      G.block(N, 0, 1, N).setOnes();
      G(N, N) = static_cast<double>(N);
    } else {
      G.block(0, N, N, N).setIdentity();
      G.block(N, 0, N, N).setIdentity();
      G.bottomRightCorner(N, N).setIdentity();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double cutoff = 1e-12 * ev.cwiseAbs().maxCoeff();
    Eigen::VectorXd inv = ev.unaryExpr([cutoff](double v) { return std::abs(v) > cutoff ? 1.0 / v : 0.0; });
    gram_pinv_ = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    target_.resize(dim);
    target_.head(N).setOnes();
    if (variant_ == Relaxation::PengWei) {
      target_(N) = k_;
    } else {
      target_.tail(N).setConstant(static_cast<double>(k_) / static_cast<double>(N));
    }
  }

  void project(Eigen::MatrixXd& Z) const {
    const Eigen::Index N = n_;
    Eigen::VectorXd r(target_.size());
    r.head(N) = Z.rowwise().sum();
    if (variant_ == Relaxation::PengWei) {
      r(N) = Z.trace();
    } else {
      r.tail(N) = Z.diagonal();
    }
    r -= target_;
    const Eigen::VectorXd y = gram_pinv_ * r;
    const Eigen::VectorXd alpha = 0.5 * y.head(N);
    Z.colwise() -= alpha;
    Z.rowwise() -= alpha.transpose();
    if (variant_ == Relaxation::PengWei) {
      Z.diagonal().array() -= y(N);
    } else {
      Z.diagonal() -= y.tail(N);
    }
  }

private:
  Relaxation variant_;
  int n_;
  int k_;
  Eigen::MatrixXd gram_pinv_;
  Eigen::VectorXd target_;
};

Residuals cheap_residuals(const Eigen::MatrixXd& Z, const SdpProblem& prob) {
  Residuals r;
  r.nonneg_violation = std::max(0.0, -Z.minCoeff());
  r.rowsum_violation = (Z.rowwise().sum().array() - 1.0).abs().maxCoeff();
  if (prob.variant == Relaxation::PengWei) {
    r.trace_violation = std::abs(Z.trace() - prob.k);
  } else {
    const double target = static_cast<double>(prob.k) / prob.size();
    r.trace_violation = (Z.diagonal().array() - target).abs().maxCoeff();
  }
  return r;
}

SdpSolution finish(const Eigen::MatrixXd& Z, const SdpProblem& prob, int iterations) {
  SdpSolution s;
  s.Z = Z;
  s.objective = prob.D.cwiseProduct(Z).sum();
  s.residuals = measure_residuals(Z, prob);
  s.iterations = iterations;
  return s;
}

// Near convergence Z2 is psd with small negative entries. Blend the two cheap
// repairs (affine projection of Z2, affine projection of max(Z2, 0)) so the psd
// and sign violations are balanced; both are affine feasible, so is the blend.
Eigen::MatrixXd polished(const Eigen::MatrixXd& Z2, const AffineProjector& affine) {
  Eigen::MatrixXd A = Z2;
  affine.project(A);
  Eigen::MatrixXd B = Z2.cwiseMax(0.0);
  affine.project(B);
  const double va = std::max(0.0, -A.minCoeff());
  const double vb = std::max(0.0, -sym_min_eigenvalue(symmetrized(B)));
  const double t = va + vb > 0.0 ? vb / (va + vb) : 1.0;
  return symmetrized(t * A + (1.0 - t) * B);
}

}  // namespace

std::string to_string(Relaxation r) {
  return r == Relaxation::PengWei ? "peng_wei" : "amini_levina";
}

Relaxation relaxation_from_string(const std::string& s) {
  if (s == "peng_wei" || s == "pw") return Relaxation::PengWei;
  if (s == "amini_levina" || s == "al" || s == "balanced") return Relaxation::AminiLevina;
  throw ValidationError("unknown relaxation '" + s + "'");
}

double Residuals::max() const noexcept {
  return std::max({psd_violation, nonneg_violation, rowsum_violation, trace_violation});
}

NotConverged::NotConverged(SdpSolution best)
    : Error("SDP solver did not converge after " + std::to_string(best.iterations) +
            " iterations (max residual " + std::to_string(best.residuals.max()) + ")"),
      best_(std::move(best)) {}

void SdpProblem::validate() const {
  const int N = size();
  if (N < 1 || D.cols() != D.rows()) throw InvalidProblem("D must be a nonempty square matrix");
  if (k < 1 || k > N) {
    throw InvalidProblem("k = " + std::to_string(k) + " outside 1.." + std::to_string(N));
  }
  if (!D.allFinite()) throw InvalidProblem("D has non-finite entries");
  const double scale = std::max(1.0, D.cwiseAbs().maxCoeff());
  if ((D - D.transpose()).cwiseAbs().maxCoeff() > kSymTol * scale) {
    throw InvalidProblem("D is not symmetric");
  }
  if (D.minCoeff() < 0.0) throw InvalidProblem("D has negative entries");
  if (D.diagonal().cwiseAbs().maxCoeff() > kSymTol * scale) {
    throw InvalidProblem("D has a nonzero diagonal");
  }
  if (variant == Relaxation::AminiLevina && N % k != 0) {
    throw InvalidProblem("balanced relaxation needs N divisible by k");
  }
}

Residuals measure_residuals(const Eigen::MatrixXd& Z, const SdpProblem& prob) {
  Residuals r = cheap_residuals(Z, prob);
  r.psd_violation = std::max(0.0, -sym_min_eigenvalue(symmetrized(Z)));
  return r;
}

SdpSolution solve(const SdpProblem& prob, const SolverOptions& opts) {
  prob.validate();
  const int N = prob.size();
  if (N > opts.size_cap) {
    throw InvalidProblem("N = " + std::to_string(N) + " exceeds solver cap " +
                         std::to_string(opts.size_cap));
  }

  if (opts.max_iter < 1 || !(opts.relaxation > 0.0 && opts.relaxation < 2.0) ||
      !(opts.rho_factor > 1.0) || !(opts.rho_ratio > 1.0) || !(opts.tol_primal > 0.0) ||
      !(opts.tol_obj >= 0.0)) {
    throw ValidationError("invalid solver options");
  }

  const double scale = std::max(prob.D.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const Eigen::MatrixXd Ds = prob.D / scale;
  const AffineProjector affine(prob);
  double rho = opts.rho0 > 0.0 ? opts.rho0 : kDefaultRho;

  Eigen::MatrixXd Zbar = Eigen::MatrixXd::Constant(N, N, static_cast<double>(prob.k) / N);
  Eigen::MatrixXd U1 = Eigen::MatrixXd::Zero(N, N);
  Eigen::MatrixXd U2 = U1;
  Eigen::MatrixXd U3 = U1;
  Eigen::MatrixXd Z1(N, N), Z2(N, N), Z3(N, N), Zr(N, N), Zold(N, N);

  Eigen::MatrixXd best_Z = Zbar;
  double best_res = std::numeric_limits<double>::infinity();
  double prev_obj = std::numeric_limits<double>::quiet_NaN();
  const double sqrt3 = std::sqrt(3.0);

  int interval = opts.adapt_every;
  int next_adapt = interval;
  for (int it = 1; it <= opts.max_iter; ++it) {
    Z1 = Zbar - U1 - Ds / rho;
    affine.project(Z1);
    Z2 = project_psd(Zbar - U2);
    Z3 = (Zbar - U3).cwiseMax(0.0);

    Zold = Zbar;
    const double a = opts.relaxation;
    if (a != 1.0) {
      // Over-relaxed copies; the unrelaxed Z2 is kept for reporting.
      Z1 = a * Z1 + (1.0 - a) * Zold;
      Z3 = a * Z3 + (1.0 - a) * Zold;
      Zr = a * Z2 + (1.0 - a) * Zold;
    } else {
      Zr = Z2;
    }
    Zbar = (Z1 + Zr + Z3 + U1 + U2 + U3) / 3.0;
    U1 += Z1 - Zbar;
    U2 += Zr - Zbar;
    U3 += Z3 - Zbar;

    const double r_norm = std::sqrt((Z1 - Zbar).squaredNorm() + (Zr - Zbar).squaredNorm() +
                                    (Z3 - Zbar).squaredNorm());
    const double step = sqrt3 * (Zbar - Zold).norm();
    const double s_norm = rho * step;

    // Z2 is psd by construction; its other residuals decide convergence.
    const Residuals res = cheap_residuals(Z2, prob);
    const double max_res = res.max();
    if (max_res < best_res) {
      best_res = max_res;
      best_Z = Z2;
    }
    const double obj = Ds.cwiseProduct(Z2).sum();
    const bool obj_stable = std::abs(obj - prev_obj) <= opts.tol_obj * (std::abs(obj) + opts.tol_primal);
    prev_obj = obj;
    if (step <= opts.tol_primal && obj_stable) {
      if (max_res <= opts.tol_primal) {
        SdpSolution s = finish(Z2, prob, it);
        if (s.residuals.max() <= opts.tol_primal) {
          s.converged = true;
          return s;
        }
      }
      if (max_res <= kPolishWindow * opts.tol_primal && it % kPolishEvery == 0) {
        SdpSolution s = finish(polished(Z2, affine), prob, it);
        if (s.residuals.max() <= opts.tol_primal) {
          s.converged = true;
          return s;
        }
      }
    }

    // Residual balancing. Each change of rho doubles the wait before the next
    // one, so rho settles and the iteration cannot cycle.
    if (opts.adapt_every > 0 && it >= next_adapt) {
      const double rho_before = rho;
      if (r_norm > opts.rho_ratio * s_norm) {
        rho *= opts.rho_factor;
        U1 /= opts.rho_factor;
        U2 /= opts.rho_factor;
        U3 /= opts.rho_factor;
      } else if (s_norm > opts.rho_ratio * r_norm) {
        rho /= opts.rho_factor;
        U1 *= opts.rho_factor;
        U2 *= opts.rho_factor;
        U3 *= opts.rho_factor;
      }
      if (rho != rho_before) interval = interval <= opts.max_iter / 2 ? 2 * interval : opts.max_iter;
      next_adapt = it + interval;
    }
  }
  throw NotConverged(finish(best_Z, prob, opts.max_iter));
}

Eigen::MatrixXd ideal_solution(const Partition& part) {
  const int N = part.size();
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(N, N);
  for (int a = 0; a < part.k(); ++a) {
    const int n = part.size_of(a);
    X.block(part.offset(a), part.offset(a), n, n).setConstant(1.0 / n);
  }
  return X;
}

Eigen::MatrixXd membership_matrix(const Partition& part) {
  const int N = part.size();
  const auto& labels = part.labels();
  Eigen::MatrixXd X(N, N);
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      const int a = labels[static_cast<std::size_t>(i)];
      X(i, j) = a == labels[static_cast<std::size_t>(j)] ? 1.0 / part.size_of(a) : 0.0;
    }
  }
  return X;
}

}  // namespace kmcert
