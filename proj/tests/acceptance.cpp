// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. `--only 4,5` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "oracles.hpp"
#include "pips/cli.hpp"
#include "pips/kernel.hpp"
#include "pips/likelihood.hpp"
#include "pips/mcmc.hpp"
#include "pips/screening.hpp"
#include "pips/stats.hpp"

using namespace pips;

namespace {

constexpr std::uint64_t kMaster = 1;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string join_values(const std::vector<double>& v, const char* f = "%.2f") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt(f, v[i]);
  return out;
}

// Fraction of replications with PIP above `threshold`, per input.
std::vector<double> detection(const std::vector<cli::ReplicationOutcome>& outs, double threshold) {
  std::vector<double> prop(outs.front().pips.p, 0.0);
  for (const auto& o : outs) {
    for (std::size_t l = 0; l < prop.size(); ++l) prop[l] += o.pips.inclusion_probs[l] > threshold ? 1.0 : 0.0;
  }
  for (double& v : prop) v /= static_cast<double>(outs.size());
  return prop;
}

bool table_bounds(const std::vector<double>& prop, const std::vector<std::size_t>& truth, double active_min,
                  double inert_max, std::map<std::size_t, double> overrides = {}) {
  bool ok = true;
  for (std::size_t l = 0; l < prop.size(); ++l) {
    const bool is_true = std::find(truth.begin(), truth.end(), l) != truth.end();
    if (is_true) {
      const double lo = overrides.count(l) ? overrides[l] : active_min;
      ok = ok && prop[l] >= lo;
    } else {
      ok = ok && prop[l] <= inert_max;
    }
  }
  return ok;
}

cli::ReplicationSettings paper_settings(bool calibrate) {
  cli::ReplicationSettings s;
  s.config = AnalysisConfig{};
  s.config.seed = kMaster;
  s.calibrate = calibrate;
  s.with_rdvs = false;
  return s;
}

// Replications of the 8-input scenario with theta fixed, shared by several criteria.
const std::vector<cli::ReplicationOutcome>& table1_outcomes() {
  static std::optional<std::vector<cli::ReplicationOutcome>> cache;
  if (!cache) cache = cli::run_replications(scenario_by_id("s41"), paper_settings(false), kMaster, 20);
  return *cache;
}

Verdict ac1() {
  const auto& outs = table1_outcomes();
  const auto prop = detection(outs, 0.5);
  return {table_bounds(prop, {0, 1, 4, 5}, 0.95, 0.05), "PIPS th0.5 detection x1..x8: " + join_values(prop)};
}

Verdict ac2() {
  const auto outs = cli::run_replications(scenario_by_id("s41"), paper_settings(true), kMaster, 20);
  const auto p5 = detection(outs, 0.5);
  const auto p9 = detection(outs, 0.9);
  const bool ok = table_bounds(p5, {0, 1, 4, 5}, 0.95, 0.05) && table_bounds(p9, {0, 1, 4, 5}, 0.95, 0.05, {{1, 0.9}});
  return {ok, "th0.5: " + join_values(p5) + " | th0.9: " + join_values(p9)};
}

Verdict ac3() {
  cli::ReplicationSettings s = paper_settings(false);
  s.with_rdvs = true;
  s.rdvs_repetitions = 20;
  s.rdvs_percentiles = {0.10};
  const auto outs = cli::run_replications(scenario_by_id("s41"), s, kMaster, 10);
  std::vector<double> prop(8, 0.0);
  for (const auto& o : outs) {
    for (std::size_t l = 0; l < 8; ++l) prop[l] += o.rdvs->active[0][l] ? 0.1 : 0.0;
  }
  bool ok = true;
  for (std::size_t l : {0, 1, 4, 5}) ok = ok && prop[l] >= 1.0 - 1e-12;
  for (std::size_t l : {2, 3, 6, 7}) ok = ok && prop[l] <= 0.25 + 1e-12;
  return {ok, "RDVS T=20 q10% detection x1..x8: " + join_values(prop)};
}

Verdict ac6() {
  std::mt19937_64 gen(606);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(gen() % 20);
    const Eigen::MatrixXd cov = oracle::random_spd(n, gen);
    Eigen::VectorXd y(n), mu(n);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int i = 0; i < n; ++i) y(i) = z(gen), mu(i) = z(gen);
    worst = std::max(worst, std::abs(mvn_logpdf(y, mu, cov) - oracle::dense_mvn_logpdf(y, mu, cov)));
  }
  return {worst <= 1e-8, fmt("max |mvn_logpdf - dense oracle| = %.3g over 100 systems", worst)};
}

// ---- Gaussian targets for the samplers ----

struct MomentCheck {
  bool ok = true;
  double worst_z = 0.0;
};

MomentCheck check_moments(const Eigen::MatrixXd& draws, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
  MomentCheck mc;
  const Eigen::Index n = draws.rows();
  const Eigen::Index d = draws.cols();
  const Eigen::VectorXd mean = draws.colwise().mean().transpose();
  auto check = [&](const std::vector<double>& series, double estimate, double truth) {
    const double se = stats::batch_means_se(series);
    const double z = std::abs(estimate - truth) / se;
    mc.worst_z = std::max(mc.worst_z, z);
    mc.ok = mc.ok && z <= 3.0;
  };
  for (Eigen::Index i = 0; i < d; ++i) {
    std::vector<double> s(draws.col(i).data(), draws.col(i).data() + n);
    check(s, mean(i), mu(i));
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      std::vector<double> s(static_cast<std::size_t>(n));
      for (Eigen::Index t = 0; t < n; ++t) s[static_cast<std::size_t>(t)] = (draws(t, i) - mean(i)) * (draws(t, j) - mean(j));
      check(s, stats::mean(s), sigma(i, j));
    }
  }
  return mc;
}

Verdict ac7() {
  Eigen::Vector3d mu(1.0, -2.0, 0.5);
  Eigen::Matrix3d sigma;
  sigma << 1.0, 0.6, 0.2, 0.6, 2.0, 0.3, 0.2, 0.3, 0.5;
  const Eigen::Matrix3d prec = sigma.inverse();
  const LogDensity target = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd r = x - mu;
    return -0.5 * r.dot(prec * r);
  };
  SamplerConfig cfg;
  cfg.n_mwg = 100000;
  cfg.n_mh = 100000;

  auto run = [&](std::uint64_t seed) {
    Rng rng = make_stream(seed, 0, StreamTag::kTest);
    const Trace mwg = mwg_phase(Eigen::Vector3d::Zero(), cfg, target, rng);
    const Eigen::MatrixXd prop = estimate_proposal_cov(mwg.draws) * (2.38 * 2.38 / 3.0);
    const Trace mh = mh_phase(mwg.draws.bottomRows(1).transpose(), prop, cfg, target, rng);
    return std::pair{mwg, mh};
  };
  const auto [mwg, mh] = run(707);
  const auto [mwg2, mh2] = run(707);
  const bool identical = mwg.draws == mwg2.draws && mh.draws == mh2.draws;
  const MomentCheck a = check_moments(mwg.draws.bottomRows(cfg.n_mwg), mu, sigma);
  const MomentCheck b = check_moments(mh.draws.bottomRows(cfg.n_mh), mu, sigma);
  return {a.ok && b.ok && identical,
          fmt("MwG worst |z| %.2f, MH worst |z| %.2f (limit 3), reruns bit-identical: %s", a.worst_z, b.worst_z,
              identical ? "yes" : "no")};
}

Verdict ac8() {
  const auto& outs = table1_outcomes();
  const std::size_t p = 8;
  double worst_sum = 0.0, worst_pair = 0.0;
  bool full_is_one = true;
  for (const auto& o : outs) {
    const auto& r = o.pips;
    full_is_one = full_is_one && r.log_bayes_factors.back() == 0.0;
    double total = 0.0;
    for (double v : r.model_posteriors) total += v;
    worst_sum = std::max(worst_sum, std::abs(total - 1.0));
    for (std::size_t l = 0; l < p; ++l) {
      for (std::size_t j = l + 1; j < p; ++j) {
        double direct = 0.0;
        for (std::uint32_t g = 0; g < r.model_posteriors.size(); ++g) {
          const ModelIndex m(g);
          if (m.active(l) || m.active(j)) direct += r.model_posteriors[g];
        }
        worst_pair = std::max(worst_pair, std::abs(direct - pair_inclusion(l, j, r.model_posteriors, p)));
      }
    }
  }

  bool inert_exact = true;
  const Design& x = outs.front().dataset.design;
  std::mt19937_64 gen(808);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  for (std::size_t l = 0; l < p; ++l) {
    std::vector<double> rho(p);
    for (double& v : rho) v = unif(gen);
    rho[l] = 1.0;
    const RhoVector rv(rho);
    const Design reduced = x.without_column(static_cast<Eigen::Index>(l));
    inert_exact = inert_exact && corr_matrix(x, rv, 1.9) == corr_matrix(reduced, rv.without(l), 1.9);
    inert_exact = inert_exact && corr_matrix_serial(x, rv, 1.9) == corr_matrix_serial(reduced, rv.without(l), 1.9);
  }
  const bool ok = full_is_one && worst_sum <= 1e-10 && worst_pair <= 1e-12 && inert_exact;
  return {ok, fmt("B_full==1: %s, max |sum posteriors - 1| %.2g, max pair identity error %.2g, inert kernel bit-exact: %s",
                  full_is_one ? "yes" : "no", worst_sum, worst_pair, inert_exact ? "yes" : "no")};
}

Verdict ac9() {
  const auto& outs = table1_outcomes();
  std::size_t differing = 0;
  for (const auto& o : outs) {
    std::vector<std::vector<bool>> classes;
    for (double alpha : {50.0, 100.0, 200.0}) {
      const std::vector<double> a(8, alpha);
      ScreeningOptions opt;
      opt.spike.alpha = alpha;
      const auto r = screen_weights(log_weight_matrix(o.rho_draws, a), a, opt);
      classes.push_back(classify(r.inclusion_probs, 0.5));
    }
    if (classes[0] != classes[1] || classes[1] != classes[2]) ++differing;
  }
  return {differing == 0, fmt("%zu of %zu replications change class across alpha in {50,100,200}", differing, outs.size())};
}

// ---- Tiny instance for the Bayes-factor checks ----

struct TinyInstance {
  Design x;
  Eigen::VectorXd y;
};

TinyInstance tiny_instance() {
  Rng rng = make_stream(404, 0, StreamTag::kTest);
  TinyInstance t;
  t.x = lhd(8, 2, rng);
  std::normal_distribution<double> noise(0.0, 0.05);
  t.y.resize(8);
  for (int i = 0; i < 8; ++i) t.y(i) = 0.3 * std::sin(2.0 * M_PI * t.x(i, 0)) + noise(rng);
  return t;
}

// log marginal likelihood of model `bits` by plain prior Monte Carlo. Inert
// inputs draw rho from Beta(alpha, 1), or sit at exactly 1 when alpha is 0.
oracle::LogMean prior_mc(const TinyInstance& t, std::uint32_t bits, double alpha, std::size_t draws,
                         std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::gamma_distribution<double> g2(3.0, 1.0), g02(4.0, 1.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(8);
  std::vector<double> ll(draws);
  for (std::size_t d = 0; d < draws; ++d) {
    std::vector<double> rho(2);
    for (std::size_t l = 0; l < 2; ++l) {
      const bool active = (bits >> l) & 1u;
      rho[l] = active ? unif(gen) : (alpha > 0.0 ? std::pow(unif(gen), 1.0 / alpha) : 1.0);
    }
    const double sigma2 = 1.0 / (g2(gen) / 1.0);
    const double sigma02 = 1.0 / (g02(gen) / 0.02);
    const Eigen::MatrixXd r = oracle::corr(t.x.matrix(), rho, 1.9);
    const Eigen::MatrixXd cov = sigma2 * r + sigma02 * Eigen::MatrixXd::Identity(8, 8);
    ll[d] = oracle::dense_mvn_logpdf(t.y, zero, cov);
  }
  return oracle::log_mean_exp(ll);
}

struct TinyResults {
  Eigen::MatrixXd rho_draws;
  oracle::LogMean full;
  std::map<std::uint32_t, oracle::LogMean> soft;  // alpha = 100
  std::map<std::uint32_t, oracle::LogMean> hard;
  std::map<std::uint32_t, oracle::LogMean> far;  // alpha = 6400, for reporting
};

const TinyResults& tiny_results() {
  static std::optional<TinyResults> cache;
  if (cache) return *cache;
  const TinyInstance t = tiny_instance();
  TinyResults r;
  SamplerConfig cfg;
  cfg.n_mh = 1000000;
  cfg.seed = 4040;
  const FieldObservations data(t.x, t.y);
  const Chain chain = run_full_sampler(data, std::make_shared<FixedMean>(Eigen::VectorXd::Zero(8)), PriorSpec{},
                                       KernelConfig{}, cfg);
  r.rho_draws = chain.rho_matrix();
  constexpr std::size_t kDraws = 2000000;
  r.full = prior_mc(t, 0b11, 0.0, kDraws, 1);
  for (std::uint32_t g : {0u, 1u, 2u}) {
    r.soft[g] = prior_mc(t, g, 100.0, kDraws, 10 + g);
    r.hard[g] = prior_mc(t, g, 0.0, kDraws, 20 + g);
    r.far[g] = prior_mc(t, g, 6400.0, kDraws, 30 + g);
  }
  cache = std::move(r);
  return *cache;
}

Verdict ac4() {
  const TinyResults& t = tiny_results();
  const Eigen::MatrixXd w = log_weight_matrix(t.rho_draws, std::vector<double>{100.0, 100.0});
  bool ok = true;
  std::string detail;
  for (std::uint32_t g : {0u, 1u, 2u}) {
    const LogBayesFactor est = log_bayes_factor_batched(ModelIndex(g), w, 1000);
    const double oracle_lbf = t.soft.at(g).log_mean - t.full.log_mean;
    const double se = std::sqrt(est.mc_se * est.mc_se + t.soft.at(g).se * t.soft.at(g).se + t.full.se * t.full.se);
    const double z = std::abs(est.log_bf - oracle_lbf) / se;
    ok = ok && z <= 3.0;
    detail += fmt("%s%s: PIPS %.4f oracle %.4f (|z| %.2f)", g ? "; " : "", ModelIndex(g).hex().c_str(), est.log_bf,
                  oracle_lbf, z);
  }
  return {ok, "log B " + detail};
}

Verdict ac5() {
  const TinyResults& t = tiny_results();
  bool ok = true;
  std::string detail;
  for (std::uint32_t g : {0u, 1u, 2u}) {
    const double b_hard = std::exp(t.hard.at(g).log_mean - t.full.log_mean);
    const double se_hard = b_hard * std::hypot(t.hard.at(g).se, t.full.se);
    std::vector<double> gaps, ses;
    for (double alpha : {50.0, 100.0, 200.0, 400.0}) {
      const Eigen::MatrixXd w = log_weight_matrix(t.rho_draws, std::vector<double>{alpha, alpha});
      const LogBayesFactor est = log_bayes_factor_batched(ModelIndex(g), w, 1000);
      const double b = std::exp(est.log_bf);
      gaps.push_back(std::abs(b - b_hard));
      ses.push_back(std::hypot(b * est.mc_se, se_hard));
    }
    for (std::size_t i = 1; i < gaps.size(); ++i) {
      ok = ok && gaps[i] <= gaps[i - 1] + 3.0 * std::hypot(ses[i], ses[i - 1]);
    }
    ok = ok && gaps.back() <= 3.0 * ses.back();
    detail += fmt("%s%s: B_hard %.4f, gaps %s", g ? "; " : "", ModelIndex(g).hex().c_str(), b_hard,
                  join_values(gaps, "%.4f").c_str());
    detail += fmt(" (SE at 400: %.4f; oracle B at alpha 6400: %.4f)", ses.back(),
                  std::exp(t.far.at(g).log_mean - t.full.log_mean));
  }
  return {ok, detail};
}

Verdict ac10() {
  auto medians = [](const std::vector<cli::ReplicationOutcome>& outs) {
    const std::size_t p = outs.front().pips.p;
    std::vector<double> med(p);
    for (std::size_t l = 0; l < p; ++l) {
      std::vector<double> v;
      for (const auto& o : outs) v.push_back(o.pips.inclusion_probs[l]);
      med[l] = stats::median(v);
    }
    return med;
  };
  const auto s13 = medians(cli::run_replications(scenario_by_id("s42-13"), paper_settings(false), kMaster, 20));
  const auto s14 = medians(cli::run_replications(scenario_by_id("s42-14"), paper_settings(false), kMaster, 20));
  const bool ok13 = s13[0] > 0.5 && s13[3] > 0.5;
  const double inert14 = std::max(s14[1], s14[3]);
  const bool ok14 = s14[2] > inert14 && s14[4] > inert14;
  return {ok13 && ok14, "median PIPs 1+3: " + join_values(s13, "%.3f") + " | 1+4: " + join_values(s14, "%.3f")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "Criteria to run (default: all)")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
      {1, ac1}, {2, ac2}, {3, ac3}, {4, ac4}, {5, ac5}, {6, ac6}, {7, ac7}, {8, ac8}, {9, ac9}, {10, ac10}};
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("AC%-2d %s  %s  [%.0fs]\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
