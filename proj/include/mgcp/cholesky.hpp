#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace mgcp {

/// Cholesky factor of a covariance matrix plus the diagonal jitter that was needed.
///
/// Factorization is first attempted on the matrix as given. On failure a jitter of
/// 1e-8 * mean(diag) is added and multiplied by 10 on each further failure, for at
/// most six escalations; after that a NumericalError is thrown.
struct Factorization {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;

  Eigen::Index size() const { return llt.matrixLLT().rows(); }
  // log|C| from the factor diagonal.
  double log_det() const;
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return llt.solve(b); }
  // L^{-1} b.
  Eigen::VectorXd half_solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd inverse() const;
};

Factorization factorize(const Eigen::MatrixXd& C);

// -log N(y | 0, C), including the n/2 log(2 pi) constant.
double gaussian_nll(const Factorization& f, const Eigen::VectorXd& y);

// W = psi psi' - C^{-1} with psi = C^{-1} y, so that d nll / d theta = -1/2 <W, dC/d theta>.
Eigen::MatrixXd nll_weight_matrix(const Factorization& f, const Eigen::VectorXd& y);

}  // namespace mgcp
