#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pips/mcmc.hpp"
#include "pips/priors.hpp"

namespace pips {

// Largest p for which all 2^p models are enumerated.
inline constexpr std::size_t kEnumerationCap = 20;

// Subset of active inputs: bit l set <=> input l is active in the discrepancy.
class ModelIndex {
 public:
  constexpr explicit ModelIndex(std::uint32_t bits) : bits_(bits) {}
  static ModelIndex full(std::size_t p);

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool active(std::size_t l) const { return (bits_ >> l) & 1u; }
  // Lower-case hex with a 0x prefix, e.g. "0xff" for the full model at p = 8.
  std::string hex() const;
  static ModelIndex parse_hex(const std::string& text);

  friend constexpr bool operator==(ModelIndex a, ModelIndex b) { return a.bits_ == b.bits_; }

 private:
  std::uint32_t bits_;
};

void check_enumeration_cap(std::size_t p);

// Entry (r, l) = log(alpha_l) + (alpha_l - 1) log(rho_l^(r)), the log spike
// density at draw r.
Eigen::MatrixXd log_weight_matrix(const Eigen::MatrixXd& rho_draws, std::span<const double> alpha);
Eigen::MatrixXd log_weight_matrix(const Chain& chain, double alpha);

struct LogBayesFactor {
  double log_bf = 0.0;
  double mc_se = 0.0;  // delta-method SE of log_bf
  double ess = 0.0;    // Kish effective sample size of the importance weights
};

// log B_gamma = log mean_r exp(sum over inert l of weights(r, l)), relative to
// the full model. The SE treats draws as independent.
LogBayesFactor log_bayes_factor(ModelIndex gamma, const Eigen::MatrixXd& weights);

// Same estimate with the SE taken from non-overlapping batch means, which
// accounts for autocorrelation in the chain.
LogBayesFactor log_bayes_factor_batched(ModelIndex gamma, const Eigen::MatrixXd& weights,
                                        std::size_t batches);

// All 2^p log Bayes factors, indexed by ModelIndex::bits(). Per-draw subset
// sums come from two half-width tables; models are processed in parallel and
// each model reduces over draws in a fixed order.
std::vector<LogBayesFactor> all_log_bayes_factors(const Eigen::MatrixXd& weights);

// Reference: one direct pass over the draws per model, single-threaded.
std::vector<LogBayesFactor> all_log_bayes_factors_serial(const Eigen::MatrixXd& weights);

// pi(gamma | y) for every gamma, normalized with log-sum-exp.
std::vector<double> model_posteriors(std::span<const double> log_bfs, const ModelSpacePrior& prior);

std::vector<double> inclusion_probabilities(std::span<const double> posteriors, std::size_t p);

// pi(x_l or x_j | y) = pi(x_l | y) + pi(x_j | y) - sum_{gamma_l = gamma_j = 1} pi(gamma | y).
double pair_inclusion(std::size_t l, std::size_t j, std::span<const double> posteriors, std::size_t p);

std::vector<bool> classify(std::span<const double> pips, double threshold);

struct ScreeningOptions {
  SpikeConfig spike;
  std::vector<double> tau;  // empty selects the constant prior
  double threshold = 0.5;
  bool pairwise = false;
  double ess_warn_fraction = 0.01;
};

struct PairInclusion {
  std::size_t l = 0;
  std::size_t j = 0;
  double probability = 0.0;
};

struct ScreeningResult {
  std::size_t p = 0;
  std::size_t draws = 0;
  std::vector<double> alpha;
  double threshold = 0.5;
  std::vector<double> log_bayes_factors;  // indexed by model bits
  std::vector<double> mc_se;
  std::vector<double> ess;
  std::vector<double> model_posteriors;
  std::vector<double> inclusion_probs;
  std::vector<bool> active;
  std::vector<PairInclusion> pairwise;
  std::size_t low_ess_models = 0;
};

ScreeningResult screen_weights(const Eigen::MatrixXd& weights, std::span<const double> alpha,
                               const ScreeningOptions& options);
ScreeningResult screen_chain(const Chain& chain, const ScreeningOptions& options);

}  // namespace pips
