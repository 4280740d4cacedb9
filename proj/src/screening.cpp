#include "pips/screening.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "pips/errors.hpp"
#include "pips/stats.hpp"

namespace pips {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t model_count(std::size_t p) { return std::size_t{1} << p; }

// Log-weights of one model across all draws, summed over inert inputs in
// ascending input order.
std::vector<double> model_log_weights(std::uint32_t gamma, const Eigen::MatrixXd& weights) {
  const Eigen::Index m = weights.rows();
  const Eigen::Index p = weights.cols();
  std::vector<double> v(static_cast<std::size_t>(m), 0.0);
  for (Eigen::Index l = 0; l < p; ++l) {
    if ((gamma >> l) & 1u) continue;
    for (Eigen::Index r = 0; r < m; ++r) v[static_cast<std::size_t>(r)] += weights(r, l);
  }
  return v;
}

LogBayesFactor from_summary(const stats::LogWeightSummary& s) {
  return {s.log_mean, s.log_se, s.kish_ess};
}

void check_weights(const Eigen::MatrixXd& weights) {
  if (weights.rows() == 0) throw ConfigError("log Bayes factors need at least one draw");
  check_enumeration_cap(static_cast<std::size_t>(weights.cols()));
}

// Streaming max-shifted sums of exp(v) and exp(2v).
struct OnlineMoments {
  double max = kNegInf;
  double s1 = 0.0;
  double s2 = 0.0;

  void add(double v) {
    if (v > max) {
      const double shift = std::exp(max - v);
      s1 = s1 * shift + 1.0;
      s2 = s2 * shift * shift + 1.0;
      max = v;
    } else {
      const double e = std::exp(v - max);
      s1 += e;
      s2 += e * e;
    }
  }
};

}  // namespace

ModelIndex ModelIndex::full(std::size_t p) {
  check_enumeration_cap(p);
  return ModelIndex(static_cast<std::uint32_t>(model_count(p) - 1));
}

std::string ModelIndex::hex() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%x", bits_);
  return buf;
}

ModelIndex ModelIndex::parse_hex(const std::string& text) {
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(text, &pos, 16);
  } catch (const std::exception&) {
    throw ConfigError("invalid model index '" + text + "'");
  }
  if (pos != text.size()) throw ConfigError("invalid model index '" + text + "'");
  return ModelIndex(static_cast<std::uint32_t>(v));
}

void check_enumeration_cap(std::size_t p) {
  if (p == 0 || p > kEnumerationCap) {
    std::ostringstream msg;
    msg << "model enumeration supports 1 <= p <= " << kEnumerationCap << " inputs (got p = " << p
        << "); 2^p models would be enumerated";
    throw ConfigError(msg.str());
  }
}

Eigen::MatrixXd log_weight_matrix(const Eigen::MatrixXd& rho_draws, std::span<const double> alpha) {
  if (rho_draws.rows() == 0) throw ConfigError("log_weight_matrix: empty chain");
  if (alpha.size() != static_cast<std::size_t>(rho_draws.cols())) {
    throw ConfigError("log_weight_matrix: need one alpha per input");
  }
  Eigen::MatrixXd out(rho_draws.rows(), rho_draws.cols());
  for (Eigen::Index l = 0; l < rho_draws.cols(); ++l) {
    const double a = alpha[static_cast<std::size_t>(l)];
    if (!(a >= 1.0)) throw ConfigError("log_weight_matrix: alpha must be >= 1");
    const double log_a = std::log(a);
    for (Eigen::Index r = 0; r < rho_draws.rows(); ++r) {
      const double rho = rho_draws(r, l);
      if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("log_weight_matrix: rho outside (0, 1]");
      out(r, l) = log_a + (a - 1.0) * std::log(rho);
    }
  }
  return out;
}

Eigen::MatrixXd log_weight_matrix(const Chain& chain, double alpha) {
  const std::vector<double> a(chain.p, alpha);
  return log_weight_matrix(chain.rho_matrix(), a);
}

LogBayesFactor log_bayes_factor(ModelIndex gamma, const Eigen::MatrixXd& weights) {
  check_weights(weights);
  if (gamma == ModelIndex::full(static_cast<std::size_t>(weights.cols()))) return {0.0, 0.0, static_cast<double>(weights.rows())};
  return from_summary(stats::summarize_log_weights(model_log_weights(gamma.bits(), weights)));
}

LogBayesFactor log_bayes_factor_batched(ModelIndex gamma, const Eigen::MatrixXd& weights,
                                        std::size_t batches) {
  check_weights(weights);
  if (gamma == ModelIndex::full(static_cast<std::size_t>(weights.cols()))) return {0.0, 0.0, static_cast<double>(weights.rows())};
  const std::vector<double> v = model_log_weights(gamma.bits(), weights);
  LogBayesFactor out = from_summary(stats::summarize_log_weights(v));
  const double m = *std::max_element(v.begin(), v.end());
  std::vector<double> w(v.size());
  for (std::size_t r = 0; r < v.size(); ++r) w[r] = std::exp(v[r] - m);
  out.mc_se = stats::batch_means_se(w, batches) / stats::mean(w);
  return out;
}

std::vector<LogBayesFactor> all_log_bayes_factors(const Eigen::MatrixXd& weights) {
  check_weights(weights);
  const std::size_t p = static_cast<std::size_t>(weights.cols());
  const std::size_t models = model_count(p);
  const std::size_t lo_bits = p / 2;
  const std::size_t hi_bits = p - lo_bits;
  const std::size_t lo_size = std::size_t{1} << lo_bits;
  const std::size_t hi_size = std::size_t{1} << hi_bits;
  const std::uint32_t lo_mask = static_cast<std::uint32_t>(lo_size - 1);
  const std::uint32_t full = static_cast<std::uint32_t>(models - 1);
  const Eigen::Index m = weights.rows();
  constexpr Eigen::Index kBlock = 256;

  // Indexed by the inert mask c = ~gamma; c = 0 is the full model.
  std::vector<OnlineMoments> acc(models);
  std::vector<double> lo_table(static_cast<std::size_t>(kBlock) * lo_size);
  std::vector<double> hi_table(static_cast<std::size_t>(kBlock) * hi_size);

  for (Eigen::Index r0 = 0; r0 < m; r0 += kBlock) {
    const Eigen::Index rows = std::min(kBlock, m - r0);
    for (Eigen::Index b = 0; b < rows; ++b) {
      double* lo = lo_table.data() + b * static_cast<Eigen::Index>(lo_size);
      double* hi = hi_table.data() + b * static_cast<Eigen::Index>(hi_size);
      lo[0] = 0.0;
      for (std::size_t c = 1; c < lo_size; ++c) {
        lo[c] = lo[c & (c - 1)] + weights(r0 + b, std::countr_zero(c));
      }
      hi[0] = 0.0;
      for (std::size_t c = 1; c < hi_size; ++c) {
        hi[c] = hi[c & (c - 1)] + weights(r0 + b, static_cast<Eigen::Index>(lo_bits) + std::countr_zero(c));
      }
    }
#pragma omp parallel for schedule(static) if (models >= 1024)
    for (std::size_t c = 0; c < models; ++c) {
      OnlineMoments& a = acc[c];
      const std::size_t lo_idx = c & lo_mask;
      const std::size_t hi_idx = c >> lo_bits;
      for (Eigen::Index b = 0; b < rows; ++b) {
        a.add(lo_table[static_cast<std::size_t>(b) * lo_size + lo_idx] +
              hi_table[static_cast<std::size_t>(b) * hi_size + hi_idx]);
      }
    }
  }

  const double count = static_cast<double>(m);
  std::vector<LogBayesFactor> out(models);
  for (std::size_t c = 0; c < models; ++c) {
    const OnlineMoments& a = acc[c];
    LogBayesFactor& f = out[full & ~static_cast<std::uint32_t>(c)];
    f.log_bf = a.max + std::log(a.s1 / count);
    f.ess = a.s1 * a.s1 / a.s2;
    f.mc_se = std::sqrt(std::max(0.0, count * a.s2 / (a.s1 * a.s1) - 1.0) / count);
  }
  out[full] = {0.0, 0.0, count};
  return out;
}

std::vector<LogBayesFactor> all_log_bayes_factors_serial(const Eigen::MatrixXd& weights) {
  check_weights(weights);
  const std::size_t models = model_count(static_cast<std::size_t>(weights.cols()));
  std::vector<LogBayesFactor> out(models);
  for (std::size_t g = 0; g < models; ++g) {
    out[g] = log_bayes_factor(ModelIndex(static_cast<std::uint32_t>(g)), weights);
  }
  return out;
}

std::vector<double> model_posteriors(std::span<const double> log_bfs, const ModelSpacePrior& prior) {
  const std::size_t models = log_bfs.size();
  const std::size_t p = prior.tau.size();
  if (models != model_count(p)) throw ConfigError("model_posteriors: need 2^p log Bayes factors");
  std::vector<double> lp(models);
  for (std::size_t g = 0; g < models; ++g) {
    lp[g] = log_bfs[g] + prior.log_prior(static_cast<std::uint32_t>(g));
  }
  const double mx = *std::max_element(lp.begin(), lp.end());
  double total = 0.0;
  for (double& v : lp) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : lp) v /= total;
  return lp;
}

std::vector<double> inclusion_probabilities(std::span<const double> posteriors, std::size_t p) {
  if (posteriors.size() != model_count(p)) throw ConfigError("inclusion_probabilities: need 2^p posteriors");
  std::vector<double> out(p, 0.0);
  for (std::size_t g = 0; g < posteriors.size(); ++g) {
    for (std::size_t l = 0; l < p; ++l) {
      if ((g >> l) & 1u) out[l] += posteriors[g];
    }
  }
  return out;
}

double pair_inclusion(std::size_t l, std::size_t j, std::span<const double> posteriors, std::size_t p) {
  if (l == j) throw ConfigError("pair_inclusion: the two inputs must differ");
  if (l >= p || j >= p) throw ConfigError("pair_inclusion: input index out of range");
  const std::vector<double> pips = inclusion_probabilities(posteriors, p);
  double both = 0.0;
  for (std::size_t g = 0; g < posteriors.size(); ++g) {
    if (((g >> l) & 1u) && ((g >> j) & 1u)) both += posteriors[g];
  }
  return pips[l] + pips[j] - both;
}

std::vector<bool> classify(std::span<const double> pips, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
  std::vector<bool> out(pips.size());
  for (std::size_t l = 0; l < pips.size(); ++l) out[l] = pips[l] > threshold;
  return out;
}

ScreeningResult screen_weights(const Eigen::MatrixXd& weights, std::span<const double> alpha,
                               const ScreeningOptions& options) {
  const std::size_t p = static_cast<std::size_t>(weights.cols());
  check_enumeration_cap(p);
  const ModelSpacePrior prior =
      options.tau.empty() ? ModelSpacePrior::constant(p) : ModelSpacePrior{options.tau};
  prior.validate(p);

  ScreeningResult res;
  res.p = p;
  res.draws = static_cast<std::size_t>(weights.rows());
  res.alpha.assign(alpha.begin(), alpha.end());
  res.threshold = options.threshold;

  const std::vector<LogBayesFactor> bfs = all_log_bayes_factors(weights);
  res.log_bayes_factors.resize(bfs.size());
  res.mc_se.resize(bfs.size());
  res.ess.resize(bfs.size());
  const double ess_floor = options.ess_warn_fraction * static_cast<double>(weights.rows());
  for (std::size_t g = 0; g < bfs.size(); ++g) {
    res.log_bayes_factors[g] = bfs[g].log_bf;
    res.mc_se[g] = bfs[g].mc_se;
    res.ess[g] = bfs[g].ess;
    if (bfs[g].ess < ess_floor) ++res.low_ess_models;
  }
  res.model_posteriors = model_posteriors(res.log_bayes_factors, prior);
  // Degenerate weights only matter for models that carry posterior mass.
  std::size_t influential = 0;
  for (std::size_t g = 0; g < bfs.size(); ++g) {
    if (res.ess[g] < ess_floor && res.model_posteriors[g] > 1e-3) ++influential;
  }
  if (influential > 0) {
    std::ostringstream msg;
    msg << influential << " model(s) with posterior probability > 0.001 have importance-weight ESS below "
        << options.ess_warn_fraction << " * M; their Bayes factors are unreliable";
    log_warning(msg.str());
  }
  res.inclusion_probs = inclusion_probabilities(res.model_posteriors, p);
  res.active = classify(res.inclusion_probs, options.threshold);
  if (options.pairwise) {
    for (std::size_t l = 0; l < p; ++l) {
      for (std::size_t j = l + 1; j < p; ++j) {
        res.pairwise.push_back({l, j, pair_inclusion(l, j, res.model_posteriors, p)});
      }
    }
  }
  return res;
}

ScreeningResult screen_chain(const Chain& chain, const ScreeningOptions& options) {
  options.spike.validate(chain.p);
  const std::vector<double> alpha = options.spike.expand(chain.p);
  return screen_weights(log_weight_matrix(chain.rho_matrix(), alpha), alpha, options);
}

}  // namespace pips
