#pragma once

#include <Eigen/Dense>

namespace pips {

// Lower Cholesky factor of an SPD matrix together with whatever diagonal
// jitter was needed to obtain it.
struct Cholesky {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;

  double log_det() const;
  // Solves L z = b and returns z.
  Eigen::VectorXd half_solve(const Eigen::VectorXd& b) const;
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
};

// Factorizes `cov`. On failure retries with cov + eps * (trace/n) * I for
// eps = 1e-10, 1e-9, ..., 1e-6, then throws NumericError.
Cholesky factorize_with_jitter(const Eigen::MatrixXd& cov);

}  // namespace pips
