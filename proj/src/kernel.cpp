#include "pips/kernel.hpp"

#include <cmath>
#include <sstream>

#include "pips/errors.hpp"

namespace pips {

namespace {

void check_a(double a) {
  if (!(a > 0.0 && a <= 2.0)) {
    std::ostringstream msg;
    msg << "kernel exponent a must lie in (0, 2], got " << a;
    throw ConfigError(msg.str());
  }
}

void check_rho(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) {
    std::ostringstream msg;
    msg << "rho must lie in (0, 1], got " << rho;
    throw ConfigError(msg.str());
  }
}

void check_dims(const Design& x, const RhoVector& rho) {
  if (static_cast<std::size_t>(x.cols()) != rho.size()) {
    std::ostringstream msg;
    msg << "design has " << x.cols() << " columns but rho has " << rho.size() << " entries";
    throw ConfigError(msg.str());
  }
}

std::vector<double> log_rho(const RhoVector& rho) {
  std::vector<double> out(rho.size());
  for (std::size_t l = 0; l < rho.size(); ++l) out[l] = std::log(rho[l]);
  return out;
}

}  // namespace

void KernelConfig::validate() const { check_a(a); }

RhoVector::RhoVector(std::vector<double> rho) : rho_(std::move(rho)) {
  for (double r : rho_) check_rho(r);
}

RhoVector RhoVector::without(std::size_t l) const {
  std::vector<double> out;
  out.reserve(rho_.size() - 1);
  for (std::size_t i = 0; i < rho_.size(); ++i) {
    if (i != l) out.push_back(rho_[i]);
  }
  return RhoVector(std::move(out));
}

Design::Design(Eigen::MatrixXd x) : x_(std::move(x)) {
  if (x_.rows() < 1 || x_.cols() < 1) throw ConfigError("design must have n >= 1 and p >= 1");
  for (Eigen::Index i = 0; i < x_.rows(); ++i) {
    for (Eigen::Index l = 0; l < x_.cols(); ++l) {
      const double v = x_(i, l);
      if (!(v >= 0.0 && v <= 1.0)) {
        std::ostringstream msg;
        msg << "design entry (" << i << ", " << l << ") = " << v << " is outside [0, 1]";
        throw ConfigError(msg.str());
      }
    }
  }
}

Design Design::without_column(Eigen::Index l) const {
  Eigen::MatrixXd out(x_.rows(), x_.cols() - 1);
  Eigen::Index c = 0;
  for (Eigen::Index j = 0; j < x_.cols(); ++j) {
    if (j != l) out.col(c++) = x_.col(j);
  }
  return Design(std::move(out));
}

Design Design::with_column(const Eigen::VectorXd& column) const {
  Eigen::MatrixXd out(x_.rows(), x_.cols() + 1);
  out.leftCols(x_.cols()) = x_;
  out.col(x_.cols()) = column;
  return Design(std::move(out));
}

double corr1d(double xi, double xj, double rho, double a) {
  check_rho(rho);
  check_a(a);
  const double d = std::abs(xi - xj);
  return std::pow(rho, std::pow(2.0, a) * std::pow(d, a));
}

Eigen::MatrixXd corr_matrix(const Design& x, const RhoVector& rho, double a) {
  check_dims(x, rho);
  check_a(a);
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const std::vector<double> lr = log_rho(rho);
  const double two_a = std::pow(2.0, a);
  const Eigen::MatrixXd& m = x.matrix();

  Eigen::MatrixXd r(n, n);
#pragma omp parallel for schedule(dynamic, 8) if (n >= 64)
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index l = 0; l < p; ++l) {
        s += lr[l] * (two_a * std::pow(std::abs(m(i, l) - m(j, l)), a));
      }
      const double v = std::exp(s);
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

Eigen::MatrixXd corr_matrix_serial(const Design& x, const RhoVector& rho, double a) {
  check_dims(x, rho);
  check_a(a);
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double v = 1.0;
      for (Eigen::Index l = 0; l < x.cols(); ++l) v *= corr1d(x(i, l), x(j, l), rho[l], a);
      r(i, j) = v;
    }
  }
  return r;
}

Eigen::MatrixXd cross_correlation(const Eigen::MatrixXd& lhs, const Eigen::MatrixXd& rhs,
                                  const RhoVector& rho, double a) {
  check_a(a);
  if (lhs.cols() != rhs.cols() || static_cast<std::size_t>(lhs.cols()) != rho.size()) {
    throw ConfigError("cross_correlation: column counts of inputs and rho differ");
  }
  const std::vector<double> lr = log_rho(rho);
  const double two_a = std::pow(2.0, a);
  Eigen::MatrixXd out(lhs.rows(), rhs.rows());
#pragma omp parallel for schedule(static) if (lhs.rows() >= 64)
  for (Eigen::Index i = 0; i < lhs.rows(); ++i) {
    for (Eigen::Index j = 0; j < rhs.rows(); ++j) {
      double s = 0.0;
      for (Eigen::Index l = 0; l < lhs.cols(); ++l) {
        s += lr[l] * (two_a * std::pow(std::abs(lhs(i, l) - rhs(j, l)), a));
      }
      out(i, j) = std::exp(s);
    }
  }
  return out;
}

Eigen::MatrixXd assemble_covariance(const Eigen::MatrixXd& r, double sigma2, double sigma02) {
  if (!(sigma2 > 0.0) || !(sigma02 > 0.0)) {
    std::ostringstream msg;
    msg << "variances must be positive (sigma2 = " << sigma2 << ", sigma02 = " << sigma02 << ")";
    throw ConfigError(msg.str());
  }
  Eigen::MatrixXd cov = sigma2 * r;
  cov.diagonal().array() += sigma02;
  return cov;
}

PairwiseDistances::PairwiseDistances(const Design& x, double a) : n_(x.rows()) {
  check_a(a);
  const Eigen::Index pairs = n_ * (n_ - 1) / 2;
  scaled_.resize(pairs, x.cols());
  const double two_a = std::pow(2.0, a);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n_; ++i) {
    for (Eigen::Index j = i + 1; j < n_; ++j, ++k) {
      for (Eigen::Index l = 0; l < x.cols(); ++l) {
        scaled_(k, l) = two_a * std::pow(std::abs(x(i, l) - x(j, l)), a);
      }
    }
  }
}

Eigen::MatrixXd PairwiseDistances::correlation(const RhoVector& rho) const {
  if (static_cast<Eigen::Index>(rho.size()) != scaled_.cols()) {
    throw ConfigError("PairwiseDistances: rho length does not match design columns");
  }
  const std::vector<double> lr = log_rho(rho);
  const Eigen::Index p = scaled_.cols();
  Eigen::MatrixXd r(n_, n_);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n_; ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n_; ++j, ++k) {
      const double* d = scaled_.data() + k * p;
      double s = 0.0;
      for (Eigen::Index l = 0; l < p; ++l) s += lr[l] * d[l];
      const double v = std::exp(s);
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

}  // namespace pips
