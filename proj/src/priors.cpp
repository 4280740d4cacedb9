#include "pips/priors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/distributions/inverse_gamma.hpp>

#include "pips/errors.hpp"

namespace pips {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double logistic(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double log_logistic(double u) {
  if (u >= 0.0) return -std::log1p(std::exp(-u));
  return u - std::log1p(std::exp(u));
}

double logit(double x) { return std::log(x) - std::log1p(-x); }

double InverseGamma::log_pdf(double x) const {
  if (!(x > 0.0) || !std::isfinite(x)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double InverseGamma::median() const {
  return boost::math::median(boost::math::inverse_gamma_distribution<double>(shape, rate));
}

void PriorSpec::validate() const {
  auto check_ig = [](const InverseGamma& ig, const char* name) {
    if (!(ig.shape > 0.0) || !(ig.rate > 0.0) || !std::isfinite(ig.shape) || !std::isfinite(ig.rate)) {
      std::ostringstream msg;
      msg << name << " inverse-gamma prior needs positive finite shape and rate";
      throw ConfigError(msg.str());
    }
  };
  check_ig(sigma2, "sigma2");
  check_ig(sigma02, "sigma02");
  for (std::size_t j = 0; j < theta_bounds.size(); ++j) {
    const Bounds& b = theta_bounds[j];
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || !(b.lower < b.upper)) {
      std::ostringstream msg;
      msg << "theta_" << (j + 1) << " prior needs finite bounds with lower < upper";
      throw ConfigError(msg.str());
    }
  }
}

std::vector<double> SpikeConfig::expand(std::size_t p) const {
  std::vector<double> out(p);
  for (std::size_t l = 0; l < p; ++l) out[l] = alpha_for(l);
  return out;
}

void SpikeConfig::validate(std::size_t p) const {
  if (!per_input.empty() && per_input.size() != p) {
    throw ConfigError("spike alpha list must have one entry per input");
  }
  for (std::size_t l = 0; l < p; ++l) {
    const double a = alpha_for(l);
    if (!(a >= 1.0) || !std::isfinite(a)) throw ConfigError("spike alpha must be >= 1");
  }
}

bool ModelSpacePrior::is_constant() const {
  for (double t : tau) {
    if (t != 0.5) return false;
  }
  return true;
}

void ModelSpacePrior::validate(std::size_t p) const {
  if (tau.size() != p) throw ConfigError("model-space prior needs one tau per input");
  for (double t : tau) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("prior inclusion probabilities must lie in (0, 1)");
  }
}

double ModelSpacePrior::log_prior(std::uint32_t gamma) const {
  double s = 0.0;
  for (std::size_t l = 0; l < tau.size(); ++l) {
    s += ((gamma >> l) & 1u) ? std::log(tau[l]) : std::log1p(-tau[l]);
  }
  return s;
}

double spike_log_density(double rho, double alpha) {
  if (!(rho > 0.0 && rho <= 1.0)) {
    std::ostringstream msg;
    msg << "spike density: rho must lie in (0, 1], got " << rho;
    throw ConfigError(msg.str());
  }
  if (!(alpha >= 1.0)) throw ConfigError("spike density: alpha must be >= 1");
  return std::log(alpha) + (alpha - 1.0) * std::log(rho);
}

double log_prior_eta(std::span<const double> theta, double sigma2, double sigma02,
                     const PriorSpec& spec) {
  if (theta.size() != spec.theta_bounds.size() && !spec.theta_bounds.empty()) return kNegInf;
  double s = spec.sigma2.log_pdf(sigma2) + spec.sigma02.log_pdf(sigma02);
  if (!std::isfinite(s)) return kNegInf;
  for (std::size_t j = 0; j < spec.theta_bounds.size(); ++j) {
    const Bounds& b = spec.theta_bounds[j];
    if (!(theta[j] >= b.lower && theta[j] <= b.upper)) return kNegInf;
    s -= std::log(b.upper - b.lower);
  }
  return s;
}

ParameterTransform::ParameterTransform(std::size_t p, std::vector<Bounds> theta_bounds)
    : p_(p), bounds_(std::move(theta_bounds)) {
  for (const Bounds& b : bounds_) {
    if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || !(b.lower < b.upper)) {
      throw ConfigError("parameter transform: theta bounds must be finite with lower < upper");
    }
  }
}

ParameterTransform::Unconstrained ParameterTransform::to_unconstrained(const Parameters& params) const {
  if (params.rho.size() != p_ || params.theta.size() != bounds_.size()) {
    throw ConfigError("parameter transform: dimension mismatch");
  }
  Unconstrained out;
  out.u.resize(static_cast<Eigen::Index>(dim()));
  Eigen::Index c = 0;
  for (double r : params.rho) out.u(c++) = logit(r);
  out.u(c++) = std::log(params.sigma2);
  out.u(c++) = std::log(params.sigma02);
  for (std::size_t j = 0; j < bounds_.size(); ++j) {
    const Bounds& b = bounds_[j];
    out.u(c++) = logit((params.theta[j] - b.lower) / (b.upper - b.lower));
  }
  if (!out.u.allFinite()) {
    throw ConfigError("parameter transform: parameters outside the open support");
  }
  out.log_jacobian = log_jacobian(out.u);
  return out;
}

Parameters ParameterTransform::from_unconstrained(const Eigen::VectorXd& u) const {
  if (static_cast<std::size_t>(u.size()) != dim()) {
    throw ConfigError("parameter transform: dimension mismatch");
  }
  if (!u.allFinite()) throw ConfigError("parameter transform: non-finite unconstrained vector");
  Parameters out;
  out.rho.resize(p_);
  Eigen::Index c = 0;
  for (std::size_t l = 0; l < p_; ++l) out.rho[l] = logistic(u(c++));
  out.sigma2 = std::exp(u(c++));
  out.sigma02 = std::exp(u(c++));
  out.theta.resize(bounds_.size());
  for (std::size_t j = 0; j < bounds_.size(); ++j) {
    const Bounds& b = bounds_[j];
    out.theta[j] = b.lower + (b.upper - b.lower) * logistic(u(c++));
  }
  return out;
}

double ParameterTransform::log_jacobian(const Eigen::VectorXd& u) const {
  double s = 0.0;
  Eigen::Index c = 0;
  // d logistic(u)/du = logistic(u) logistic(-u)
  for (std::size_t l = 0; l < p_; ++l, ++c) s += log_logistic(u(c)) + log_logistic(-u(c));
  s += u(c++);
  s += u(c++);
  for (std::size_t j = 0; j < bounds_.size(); ++j, ++c) {
    s += std::log(bounds_[j].upper - bounds_[j].lower) + log_logistic(u(c)) + log_logistic(-u(c));
  }
  return s;
}

}  // namespace pips
