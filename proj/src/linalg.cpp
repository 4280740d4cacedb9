#include "pips/linalg.hpp"

#include <cmath>
#include <sstream>

#include "pips/errors.hpp"

namespace pips {

double Cholesky::log_det() const {
  const auto& m = llt.matrixLLT();
  double s = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) s += std::log(m(i, i));
  return 2.0 * s;
}

Eigen::VectorXd Cholesky::half_solve(const Eigen::VectorXd& b) const {
  return llt.matrixL().solve(b);
}

Eigen::VectorXd Cholesky::solve(const Eigen::VectorXd& b) const {
  return llt.solve(b);
}

Eigen::MatrixXd Cholesky::solve(const Eigen::MatrixXd& b) const {
  return llt.solve(b);
}

Cholesky factorize_with_jitter(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    throw NumericError("factorize_with_jitter: matrix must be square and non-empty");
  }
  if (!cov.allFinite()) {
    throw NumericError("factorize_with_jitter: matrix has non-finite entries");
  }
  Cholesky out;
  out.llt.compute(cov);
  if (out.llt.info() == Eigen::Success) return out;

  const double n = static_cast<double>(cov.rows());
  const double scale = cov.trace() / n;
  for (double eps = 1e-10; eps <= 1e-6 * 1.0000001; eps *= 10.0) {
    Eigen::MatrixXd jittered = cov;
    jittered.diagonal().array() += eps * scale;
    out.llt.compute(jittered);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = eps * scale;
      return out;
    }
  }
  std::ostringstream msg;
  msg << "Cholesky factorization failed for " << cov.rows() << "x" << cov.cols()
      << " matrix after jitter up to 1e-6*trace/n";
  throw NumericError(msg.str());
}

}  // namespace pips
