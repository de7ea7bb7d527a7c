#pragma once

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "probit_mix/errors.hpp"

namespace probit_mix::linalg {

/// Index of the first pivot at which an unpivoted Cholesky of `a` fails.
inline Eigen::Index failing_pivot(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(diag > 0.0) || !std::isfinite(diag)) return j;
    l(j, j) = std::sqrt(diag);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return n;
}

/// Lower Cholesky factor of a symmetric positive definite matrix, or throws
/// NotPositiveDefiniteError naming `what` and the failing pivot.
inline Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a, const std::string& what) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success || !llt.matrixLLT().allFinite()) {
    throw NotPositiveDefiniteError(what, static_cast<std::size_t>(failing_pivot(a)));
  }
  Eigen::MatrixXd l = llt.matrixL();
  if ((l.diagonal().array() <= 0.0).any()) {
    throw NotPositiveDefiniteError(what, static_cast<std::size_t>(failing_pivot(a)));
  }
  return l;
}

/// Inverse of an SPD matrix through its Cholesky factor; result is exactly symmetric.
inline Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a, const std::string& what) {
  const Eigen::MatrixXd l = cholesky_lower(a, what);
  Eigen::MatrixXd inv = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  l.triangularView<Eigen::Lower>().solveInPlace(inv);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(inv);
  return 0.5 * (inv + inv.transpose());
}

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

/// Ascending eigenvalues of a symmetric matrix.
inline Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& a) {
  if (a.rows() == 0) return Eigen::VectorXd();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

inline double lambda_max(const Eigen::MatrixXd& a) {
  const Eigen::VectorXd ev = symmetric_eigenvalues(a);
  return ev.size() == 0 ? 0.0 : ev(ev.size() - 1);
}

}  // namespace probit_mix::linalg
