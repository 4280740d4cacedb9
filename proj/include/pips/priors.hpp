#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pips {

// Inverse gamma with density proportional to x^(-shape-1) exp(-rate/x).
struct InverseGamma {
  double shape = 1.0;
  double rate = 1.0;

  double log_pdf(double x) const;
  double median() const;
};

struct Bounds {
  double lower = 0.0;
  double upper = 1.0;
};

// Priors on eta = (theta, sigma2, sigma02). Theta gets independent uniforms
// on finite boxes; an empty theta_bounds means theta is not calibrated.
struct PriorSpec {
  InverseGamma sigma2{3.0, 1.0};
  InverseGamma sigma02{4.0, 0.02};
  std::vector<Bounds> theta_bounds;

  void validate() const;
};

// Spike Beta(alpha_l, 1). One shared alpha unless per-input values are given.
struct SpikeConfig {
  double alpha = 100.0;
  std::vector<double> per_input;

  double alpha_for(std::size_t l) const { return per_input.empty() ? alpha : per_input[l]; }
  std::vector<double> expand(std::size_t p) const;
  void validate(std::size_t p) const;
};

// Independent Bernoulli(tau_l) prior on the model indicator; the constant
// prior is tau_l = 1/2 for every input.
struct ModelSpacePrior {
  std::vector<double> tau;

  static ModelSpacePrior constant(std::size_t p) { return {std::vector<double>(p, 0.5)}; }
  bool is_constant() const;
  void validate(std::size_t p) const;
  // log pi(gamma); bit l of `gamma` set means input l is active.
  double log_prior(std::uint32_t gamma) const;
};

// log Beta(rho | alpha, 1) = log(alpha) + (alpha - 1) log(rho).
double spike_log_density(double rho, double alpha);

// log pi(theta) + log pi(sigma2) + log pi(sigma02); -inf outside the support.
double log_prior_eta(std::span<const double> theta, double sigma2, double sigma02,
                     const PriorSpec& spec);

// Constrained parameter block (rho, sigma2, sigma02, theta).
struct Parameters {
  std::vector<double> rho;
  double sigma2 = 1.0;
  double sigma02 = 1.0;
  std::vector<double> theta;
};

// Bijection between Parameters and R^d with d = p + 2 + k:
// logit(rho_l), log(sigma2), log(sigma02), logit((theta_j - lo_j) / (hi_j - lo_j)).
class ParameterTransform {
 public:
  ParameterTransform(std::size_t p, std::vector<Bounds> theta_bounds);

  std::size_t p() const { return p_; }
  std::size_t k() const { return bounds_.size(); }
  std::size_t dim() const { return p_ + 2 + bounds_.size(); }

  struct Unconstrained {
    Eigen::VectorXd u;
    double log_jacobian = 0.0;
  };

  Unconstrained to_unconstrained(const Parameters& params) const;
  Parameters from_unconstrained(const Eigen::VectorXd& u) const;
  // log |det d(from_unconstrained)/du|.
  double log_jacobian(const Eigen::VectorXd& u) const;

 private:
  std::size_t p_;
  std::vector<Bounds> bounds_;
};

double logistic(double u);
double log_logistic(double u);
double logit(double x);

}  // namespace pips
