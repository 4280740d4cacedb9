#include "pips/mcmc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>

#include "pips/errors.hpp"
#include "pips/linalg.hpp"
#include "pips/stats.hpp"

namespace pips {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool accept(double log_ratio, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  return std::log(unif(rng)) < log_ratio;
}

double initial_log_density(const Eigen::VectorXd& init, const LogDensity& target) {
  const double lp = target(init);
  if (!std::isfinite(lp)) throw ConfigError("sampler: initial point has non-finite log density");
  return lp;
}

}  // namespace

void SamplerConfig::validate() const {
  if (!seed) throw ConfigError("sampler: an rng seed is required");
  if (thinning == 0) throw ConfigError("sampler: thinning must be positive");
  if (adapt_steps && adapt_interval == 0) throw ConfigError("sampler: adapt_interval must be positive");
  if (!(initial_step > 0.0)) throw ConfigError("sampler: initial step must be positive");
  if (n_mh == 0) throw ConfigError("sampler: n_mh must be positive");
  if (burn_in >= n_mh) throw ConfigError("sampler: burn_in must be smaller than n_mh");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0)) {
    throw ConfigError("sampler: target acceptance must lie in (0, 1)");
  }
}

Trace mwg_phase(const Eigen::VectorXd& init, const SamplerConfig& config, const LogDensity& target,
                Rng& rng) {
  const Eigen::Index d = init.size();
  const std::size_t n = config.n_mwg;
  Trace out;
  out.draws.resize(static_cast<Eigen::Index>(n) + 1, d);
  out.log_density.resize(static_cast<Eigen::Index>(n) + 1);

  Eigen::VectorXd x = init;
  double lp = initial_log_density(init, target);
  out.draws.row(0) = x.transpose();
  out.log_density(0) = lp;

  std::vector<double> steps(static_cast<std::size_t>(d), config.initial_step);
  std::vector<std::size_t> accepted(static_cast<std::size_t>(d), 0);
  std::vector<std::size_t> window(static_cast<std::size_t>(d), 0);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (std::size_t it = 1; it <= n; ++it) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const double old = x(c);
      x(c) = old + steps[c] * normal(rng);
      const double lp_new = target(x);
      if (accept(lp_new - lp, rng)) {
        lp = lp_new;
        ++accepted[c];
        ++window[c];
      } else {
        x(c) = old;
      }
    }
    out.draws.row(static_cast<Eigen::Index>(it)) = x.transpose();
    out.log_density(static_cast<Eigen::Index>(it)) = lp;

    if (config.adapt_steps && it % config.adapt_interval == 0) {
      for (std::size_t c = 0; c < steps.size(); ++c) {
        const double rate = static_cast<double>(window[c]) / static_cast<double>(config.adapt_interval);
        if (rate > config.target_acceptance + 0.1) {
          steps[c] *= 2.0;
        } else if (rate < config.target_acceptance - 0.1) {
          steps[c] *= 0.5;
        }
        window[c] = 0;
      }
    }
  }

  out.acceptance.resize(static_cast<std::size_t>(d));
  for (std::size_t c = 0; c < out.acceptance.size(); ++c) {
    out.acceptance[c] = n == 0 ? 0.0 : static_cast<double>(accepted[c]) / static_cast<double>(n);
  }
  out.final_steps = steps;
  return out;
}

Eigen::MatrixXd estimate_proposal_cov(const Eigen::MatrixXd& draws) {
  const Eigen::Index d = draws.cols();
  if (draws.rows() < d + 2) {
    std::ostringstream msg;
    msg << "estimate_proposal_cov: need at least " << (d + 2) << " draws, got " << draws.rows();
    throw ConfigError(msg.str());
  }
  Eigen::MatrixXd cov = stats::sample_covariance(draws);
  cov.diagonal().array() += 1e-8;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("estimate_proposal_cov: eigen decomposition failed");
  if (eig.eigenvalues().minCoeff() < 1e-10) {
    const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(1e-10);
    cov = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    cov = (0.5 * (cov + cov.transpose())).eval();
  }
  return cov;
}

Trace mh_phase(const Eigen::VectorXd& init, const Eigen::MatrixXd& proposal_cov,
               const SamplerConfig& config, const LogDensity& target, Rng& rng) {
  const Eigen::Index d = init.size();
  if (proposal_cov.rows() != d || proposal_cov.cols() != d) {
    throw ConfigError("mh_phase: proposal covariance has the wrong dimension");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(proposal_cov);
  if (llt.info() != Eigen::Success) throw NumericError("mh_phase: proposal covariance is not SPD");
  const Eigen::MatrixXd l = llt.matrixL();

  const std::size_t n = config.n_mh;
  Trace out;
  out.draws.resize(static_cast<Eigen::Index>(n) + 1, d);
  out.log_density.resize(static_cast<Eigen::Index>(n) + 1);

  Eigen::VectorXd x = init;
  double lp = initial_log_density(init, target);
  out.draws.row(0) = x.transpose();
  out.log_density(0) = lp;

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(d);
  std::size_t accepted = 0;
  for (std::size_t it = 1; it <= n; ++it) {
    for (Eigen::Index c = 0; c < d; ++c) z(c) = normal(rng);
    const Eigen::VectorXd proposal = x + l * z;
    const double lp_new = target(proposal);
    if (accept(lp_new - lp, rng)) {
      x = proposal;
      lp = lp_new;
      ++accepted;
    }
    out.draws.row(static_cast<Eigen::Index>(it)) = x.transpose();
    out.log_density(static_cast<Eigen::Index>(it)) = lp;
  }
  out.acceptance = {n == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(n)};
  return out;
}

Eigen::MatrixXd Chain::rho_matrix() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(p));
  for (std::size_t r = 0; r < samples.size(); ++r) {
    for (std::size_t l = 0; l < p; ++l) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(l)) = samples[r].rho[l];
  }
  return out;
}

std::vector<double> Chain::rho_medians() const {
  std::vector<double> out(p);
  std::vector<double> column(samples.size());
  for (std::size_t l = 0; l < p; ++l) {
    for (std::size_t r = 0; r < samples.size(); ++r) column[r] = samples[r].rho[l];
    out[l] = stats::median(column);
  }
  return out;
}

FullModelPosterior::FullModelPosterior(const FieldObservations& data,
                                       std::shared_ptr<const FieldMean> mean, PriorSpec prior,
                                       KernelConfig kernel, std::vector<double> fixed_theta)
    : data_(data),
      mean_(std::move(mean)),
      prior_(std::move(prior)),
      kernel_(kernel),
      fixed_theta_(std::move(fixed_theta)),
      transform_(static_cast<std::size_t>(data.p()), prior_.theta_bounds),
      distances_(data.design, kernel.a) {
  prior_.validate();
  kernel_.validate();
  if (!mean_) throw ConfigError("posterior: null mean structure");
  if (!prior_.theta_bounds.empty() && !fixed_theta_.empty()) {
    throw ConfigError("posterior: theta is either calibrated (bounds) or fixed, not both");
  }
}

std::vector<double> FullModelPosterior::effective_theta(const Parameters& params) const {
  return prior_.theta_bounds.empty() ? fixed_theta_ : params.theta;
}

Parameters FullModelPosterior::initial_parameters() const {
  Parameters init;
  init.rho.assign(static_cast<std::size_t>(data_.p()), 0.5);
  init.sigma2 = prior_.sigma2.median();
  init.sigma02 = prior_.sigma02.median();
  for (const Bounds& b : prior_.theta_bounds) init.theta.push_back(0.5 * (b.lower + b.upper));
  return init;
}

double FullModelPosterior::log_likelihood(const Parameters& params) const {
  const std::vector<double> theta = effective_theta(params);
  Eigen::MatrixXd cov = assemble_covariance(distances_.correlation(RhoVector(params.rho)),
                                            params.sigma2, params.sigma02);
  if (mean_->has_extra_covariance()) {
    const auto [mu, extra] = mean_->mean_and_extra(theta);
    cov += extra;
    return mvn_logpdf(data_.y, mu, cov);
  }
  return mvn_logpdf(data_.y, mean_->mean(theta), cov);
}

double FullModelPosterior::operator()(const Eigen::VectorXd& u) const {
  if (!u.allFinite()) return kNegInf;
  const Parameters params = transform_.from_unconstrained(u);
  for (double r : params.rho) {
    if (!(r > 0.0 && r <= 1.0)) return kNegInf;
  }
  const double lprior = log_prior_eta(params.theta, params.sigma2, params.sigma02, prior_);
  if (!std::isfinite(lprior)) return kNegInf;
  if (!(params.sigma2 > 0.0) || !(params.sigma02 > 0.0) || !std::isfinite(params.sigma2) ||
      !std::isfinite(params.sigma02)) {
    return kNegInf;
  }
  double llik;
  try {
    llik = log_likelihood(params);
  } catch (const NumericError& e) {
    static std::atomic<int> warned{0};
    if (warned.fetch_add(1) < 5) log_warning(std::string("log posterior set to -inf: ") + e.what());
    return kNegInf;
  }
  return llik + lprior + transform_.log_jacobian(u);
}

double log_posterior_full(const Eigen::VectorXd& u, const FullModelPosterior& posterior) {
  return posterior(u);
}

Chain run_full_sampler(const FullModelPosterior& posterior, const SamplerConfig& config) {
  config.validate();
  Rng rng = make_stream(*config.seed, 0, StreamTag::kChain);
  const LogDensity target = [&posterior](const Eigen::VectorXd& u) { return posterior(u); };
  const ParameterTransform& tr = posterior.transform();

  const Eigen::VectorXd init = tr.to_unconstrained(posterior.initial_parameters()).u;
  const Trace warm = mwg_phase(init, config, target, rng);
  const Eigen::Index d = static_cast<Eigen::Index>(tr.dim());
  Eigen::MatrixXd cov = estimate_proposal_cov(warm.draws);
  const double scale = config.mh_scale > 0.0 ? config.mh_scale : 2.38 * 2.38 / static_cast<double>(d);
  cov *= scale;
  const Eigen::VectorXd start = warm.draws.row(warm.draws.rows() - 1).transpose();
  const Trace main = mh_phase(start, cov, config, target, rng);

  Chain chain;
  chain.p = tr.p();
  chain.k = tr.k();
  chain.mwg_acceptance = warm.acceptance;
  chain.mh_acceptance = main.acceptance.front();
  if (chain.mh_acceptance < 0.1 || chain.mh_acceptance > 0.6) {
    std::ostringstream msg;
    msg << "MH acceptance rate " << chain.mh_acceptance << " outside [0.1, 0.6]";
    log_warning(msg.str());
  }

  auto push = [&](const Trace& trace, Eigen::Index row) {
    const Eigen::VectorXd u = trace.draws.row(row).transpose();
    const Parameters params = tr.from_unconstrained(u);
    ChainSample s;
    s.rho = params.rho;
    s.sigma2 = params.sigma2;
    s.sigma02 = params.sigma02;
    s.theta = params.theta;
    s.log_post = trace.log_density(row) - tr.log_jacobian(u);
    chain.samples.push_back(std::move(s));
  };
  if (config.keep_warmup) {
    for (Eigen::Index r = 0; r < warm.draws.rows(); ++r) push(warm, r);
  }
  // Row 0 of the MH trace repeats the last warmup draw.
  for (Eigen::Index r = 1 + static_cast<Eigen::Index>(config.burn_in); r < main.draws.rows();
       r += static_cast<Eigen::Index>(config.thinning)) {
    push(main, r);
  }

  chain.ess.resize(static_cast<std::size_t>(d));
  const Eigen::Index kept = main.draws.rows() - 1;
  std::vector<double> column(static_cast<std::size_t>(kept));
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < kept; ++r) column[static_cast<std::size_t>(r)] = main.draws(r + 1, c);
    chain.ess[static_cast<std::size_t>(c)] = stats::effective_sample_size(column);
  }
  return chain;
}

Chain run_full_sampler(const FieldObservations& data, std::shared_ptr<const FieldMean> mean,
                       const PriorSpec& prior, const KernelConfig& kernel, const SamplerConfig& config,
                       std::vector<double> fixed_theta) {
  const FullModelPosterior posterior(data, std::move(mean), prior, kernel, std::move(fixed_theta));
  return run_full_sampler(posterior, config);
}

}  // namespace pips
