#include "mgcp/cholesky.hpp"

#include <cmath>
#include <sstream>

#include "mgcp/errors.hpp"

namespace mgcp {

double Factorization::log_det() const {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Eigen::VectorXd Factorization::half_solve(const Eigen::VectorXd& b) const {
  return llt.matrixL().solve(b);
}

Eigen::MatrixXd Factorization::inverse() const {
  return llt.solve(Eigen::MatrixXd::Identity(size(), size()));
}

Factorization factorize(const Eigen::MatrixXd& C) {
  if (C.rows() != C.cols()) throw ArgumentError("covariance matrix must be square");
  if (!C.allFinite()) throw NumericalError("covariance matrix has non-finite entries");

  Factorization f;
  f.llt.compute(C);
  if (f.llt.info() == Eigen::Success) return f;

  const double mean_diag = C.rows() > 0 ? C.diagonal().mean() : 0.0;
  double jitter = 1e-8 * (mean_diag > 0.0 ? mean_diag : 1.0);
  constexpr int kMaxEscalations = 6;
  for (int attempt = 0; attempt <= kMaxEscalations; ++attempt, jitter *= 10.0) {
    Eigen::MatrixXd J = C;
    J.diagonal().array() += jitter;
    f.llt.compute(J);
    if (f.llt.info() == Eigen::Success) {
      f.jitter = jitter;
      return f;
    }
  }
  std::ostringstream msg;
  msg << "Cholesky factorization failed for " << C.rows() << "x" << C.cols()
      << " covariance (mean diagonal " << mean_diag << ", last jitter " << jitter / 10.0 << ")";
  throw NumericalError(msg.str());
}

double gaussian_nll(const Factorization& f, const Eigen::VectorXd& y) {
  if (y.size() != f.size()) throw ArgumentError("response length does not match covariance size");
  const Eigen::VectorXd z = f.half_solve(y);
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  return 0.5 * z.squaredNorm() + 0.5 * f.log_det() + 0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

Eigen::MatrixXd nll_weight_matrix(const Factorization& f, const Eigen::VectorXd& y) {
  const Eigen::VectorXd psi = f.solve(y);
  Eigen::MatrixXd W = psi * psi.transpose();
  W -= f.inverse();
  return W;
}

}  // namespace mgcp
