#include "kmcert/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace kmcert {

double sym_min_eigenvalue(const Eigen::MatrixXd& S) {
  if (S.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

double sym_operator_norm(const Eigen::MatrixXd& S) {
  if (S.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const Eigen::MatrixXd& V = es.eigenvectors();
  // Eigenvalues ascend; keep only the nonnegative tail.
  Eigen::Index first = 0;
  while (first < ev.size() && ev(first) <= 0.0) ++first;
  const Eigen::Index count = ev.size() - first;
  if (count == 0) return Eigen::MatrixXd::Zero(S.rows(), S.cols());
  const auto Vp = V.rightCols(count);
  Eigen::MatrixXd out = Vp * ev.tail(count).asDiagonal() * Vp.transpose();
  return symmetrized(out);
}

}  // namespace kmcert
