#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pips/kernel.hpp"
#include "pips/likelihood.hpp"
#include "pips/priors.hpp"
#include "pips/rng.hpp"

namespace pips {

// Log target density on R^d; -inf marks points outside the support.
using LogDensity = std::function<double(const Eigen::VectorXd&)>;

struct SamplerConfig {
  std::size_t n_mwg = 5000;
  std::size_t n_mh = 10000;
  std::size_t burn_in = 0;   // MH draws dropped before thinning
  std::size_t thinning = 1;
  double initial_step = 0.3;  // MwG random-walk sd on the unconstrained scale
  bool adapt_steps = true;
  std::size_t adapt_interval = 100;
  double target_acceptance = 0.44;
  double mh_scale = 0.0;      // <= 0 selects 2.38^2 / d
  bool keep_warmup = false;   // also return the MwG draws
  std::optional<std::uint64_t> seed;

  void validate() const;
};

// Draws on the unconstrained scale. Row 0 is the starting point.
struct Trace {
  Eigen::MatrixXd draws;
  Eigen::VectorXd log_density;
  std::vector<double> acceptance;  // per coordinate for MwG, one entry for MH
  std::vector<double> final_steps;
};

// One-coordinate-at-a-time Gaussian random-walk Metropolis. With adaptation
// on, every `adapt_interval` sweeps each coordinate's step is doubled if its
// window acceptance exceeds target + 0.1 and halved if below target - 0.1.
Trace mwg_phase(const Eigen::VectorXd& init, const SamplerConfig& config, const LogDensity& target,
                Rng& rng);

// Sample covariance of the draws, plus 1e-8 I, with eigenvalues below 1e-10
// raised to 1e-10.
Eigen::MatrixXd estimate_proposal_cov(const Eigen::MatrixXd& draws);

// Joint Gaussian random-walk Metropolis with proposal N(x, proposal_cov).
Trace mh_phase(const Eigen::VectorXd& init, const Eigen::MatrixXd& proposal_cov,
               const SamplerConfig& config, const LogDensity& target, Rng& rng);

struct ChainSample {
  std::vector<double> rho;
  double sigma2 = 0.0;
  double sigma02 = 0.0;
  std::vector<double> theta;
  double log_post = 0.0;  // unnormalized log posterior on the constrained scale
};

struct Chain {
  std::size_t p = 0;
  std::size_t k = 0;
  std::vector<ChainSample> samples;
  std::vector<double> mwg_acceptance;
  double mh_acceptance = 0.0;
  std::vector<double> ess;  // per unconstrained coordinate, MH phase

  // M x p matrix of the rho draws.
  Eigen::MatrixXd rho_matrix() const;
  // Per-input posterior median of rho.
  std::vector<double> rho_medians() const;
};

// Log posterior of the full model (every rho_l under the uniform slab) on the
// unconstrained scale: log-likelihood + log pi(eta) + log-Jacobian. The
// extended covariance of the emulator is included when the mean provides it.
class FullModelPosterior {
 public:
  FullModelPosterior(const FieldObservations& data, std::shared_ptr<const FieldMean> mean,
                     PriorSpec prior, KernelConfig kernel, std::vector<double> fixed_theta = {});

  double operator()(const Eigen::VectorXd& u) const;
  double log_likelihood(const Parameters& params) const;

  const ParameterTransform& transform() const { return transform_; }
  const PriorSpec& prior() const { return prior_; }
  // Theta used by the likelihood: the constrained draw, or the fixed value.
  std::vector<double> effective_theta(const Parameters& params) const;
  Parameters initial_parameters() const;

 private:
  FieldObservations data_;
  std::shared_ptr<const FieldMean> mean_;
  PriorSpec prior_;
  KernelConfig kernel_;
  std::vector<double> fixed_theta_;
  ParameterTransform transform_;
  PairwiseDistances distances_;
};

double log_posterior_full(const Eigen::VectorXd& u, const FullModelPosterior& posterior);

// MwG warmup, covariance estimate, MH run, burn-in and thinning. The RNG is
// make_stream(config.seed, 0, StreamTag::kChain).
Chain run_full_sampler(const FullModelPosterior& posterior, const SamplerConfig& config);

Chain run_full_sampler(const FieldObservations& data, std::shared_ptr<const FieldMean> mean,
                       const PriorSpec& prior, const KernelConfig& kernel, const SamplerConfig& config,
                       std::vector<double> fixed_theta = {});

}  // namespace pips
