#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pips {

// Power-exponential kernel exponent; fixed for a whole analysis.
struct KernelConfig {
  double a = 1.9;

  void validate() const;
};

// Per-input correlation parameters in (0, 1]; rho_l == 1 means input l is inert.
class RhoVector {
 public:
  RhoVector() = default;
  explicit RhoVector(std::vector<double> rho);
  static RhoVector ones(std::size_t p) { return RhoVector(std::vector<double>(p, 1.0)); }

  std::size_t size() const { return rho_.size(); }
  double operator[](std::size_t l) const { return rho_[l]; }
  std::span<const double> values() const { return rho_; }

  RhoVector without(std::size_t l) const;

 private:
  std::vector<double> rho_;
};

// n x p matrix of input configurations scaled to [0, 1].
class Design {
 public:
  Design() = default;
  explicit Design(Eigen::MatrixXd x);

  Eigen::Index rows() const { return x_.rows(); }
  Eigen::Index cols() const { return x_.cols(); }
  const Eigen::MatrixXd& matrix() const { return x_; }
  double operator()(Eigen::Index i, Eigen::Index l) const { return x_(i, l); }

  Design without_column(Eigen::Index l) const;
  Design with_column(const Eigen::VectorXd& column) const;

 private:
  Eigen::MatrixXd x_;
};

// rho^(2^a |xi - xj|^a).
double corr1d(double xi, double xj, double rho, double a);

// Separable correlation matrix. Rows are filled in parallel; each entry is
// computed independently so the result does not depend on the thread count.
Eigen::MatrixXd corr_matrix(const Design& x, const RhoVector& rho, double a);

// Reference implementation: literal product of corr1d terms, single-threaded.
Eigen::MatrixXd corr_matrix_serial(const Design& x, const RhoVector& rho, double a);

// Correlations between the rows of `lhs` and `rhs` (no [0,1] requirement).
Eigen::MatrixXd cross_correlation(const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs,
                                  const RhoVector& rho, double a);

// sigma2 * R + sigma02 * I.
Eigen::MatrixXd assemble_covariance(const Eigen::MatrixXd& r, double sigma2, double sigma02);

// Scaled distances 2^a |x_il - x_jl|^a for every pair i < j, precomputed once
// per design so that repeated correlation matrices cost one dot product per
// pair. Used by the samplers.
class PairwiseDistances {
 public:
  PairwiseDistances(const Design& x, double a);

  Eigen::Index n() const { return n_; }
  Eigen::Index p() const { return scaled_.cols(); }

  // Same values as corr_matrix(x, rho, a) up to rounding.
  Eigen::MatrixXd correlation(const RhoVector& rho) const;

 private:
  Eigen::Index n_ = 0;
  // Row k holds the scaled distances of pair k (row-major upper triangle).
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> scaled_;
};

}  // namespace pips
