#include "pips/emulator.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "json.hpp"
#include "pips/errors.hpp"
#include "pips/priors.hpp"
#include "pips/rng.hpp"
#include "pips/scenarios.hpp"

namespace pips {

namespace {

using Json = nlohmann::json;

RhoVector rho_from_ranges(const std::vector<double>& ranges, double a) {
  std::vector<double> rho(ranges.size());
  const double half_a = std::pow(0.5, a);
  for (std::size_t j = 0; j < ranges.size(); ++j) rho[j] = std::exp(-half_a / ranges[j]);
  return RhoVector(std::move(rho));
}

struct ColumnScaling {
  Eigen::VectorXd lower;
  Eigen::VectorXd span;
};

ColumnScaling column_scaling(const Eigen::MatrixXd& raw) {
  ColumnScaling s;
  s.lower = raw.colwise().minCoeff().transpose();
  s.span = raw.colwise().maxCoeff().transpose() - s.lower;
  for (Eigen::Index j = 0; j < s.span.size(); ++j) {
    if (!(s.span(j) > 0.0)) s.span(j) = 1.0;
  }
  return s;
}

Eigen::MatrixXd apply_scaling(const Eigen::MatrixXd& raw, const ColumnScaling& s) {
  return (raw.rowwise() - s.lower.transpose()).array().rowwise() / s.span.transpose().array();
}

// Profile log marginal likelihood of a constant-mean GaSP in the log ranges.
struct Profile {
  const Eigen::MatrixXd* scaled = nullptr;
  const Eigen::VectorXd* outputs = nullptr;
  // powered[j](i, k) = |x_ij - x_kj|^a
  std::vector<Eigen::MatrixXd> powered;
  double a = 1.9;
  double variance_floor = 1e-10;
  double log_lo = 0.0;
  double log_hi = 0.0;

  struct Value {
    bool ok = false;
    double loglik = -std::numeric_limits<double>::infinity();
    double mean = 0.0;
    double variance = 0.0;
    Eigen::VectorXd grad;  // with respect to log psi
  };

  Value evaluate(const Eigen::VectorXd& log_psi, bool want_grad) const {
    Value v;
    const Eigen::Index n = scaled->rows();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < powered.size(); ++j) c -= powered[j] / std::exp(log_psi(static_cast<Eigen::Index>(j)));
    c = c.array().exp().matrix();
    Cholesky chol;
    try {
      chol = factorize_with_jitter(c);
    } catch (const NumericError&) {
      return v;
    }
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd ci1 = chol.solve(ones);
    v.mean = ci1.dot(*outputs) / ci1.sum();
    const Eigen::VectorXd r = (*outputs).array() - v.mean;
    const Eigen::VectorXd beta = chol.solve(r);
    v.variance = std::max(r.dot(beta) / static_cast<double>(n), variance_floor);
    const double dn = static_cast<double>(n);
    v.loglik = -0.5 * (dn * std::log(v.variance) + chol.log_det() + dn * (1.0 + std::log(2.0 * std::numbers::pi)));
    v.ok = std::isfinite(v.loglik);
    if (want_grad && v.ok) {
      const Eigen::MatrixXd cinv = chol.solve(Eigen::MatrixXd(Eigen::MatrixXd::Identity(n, n)));
      const Eigen::MatrixXd core = (beta * beta.transpose()) / v.variance - cinv;
      v.grad.resize(static_cast<Eigen::Index>(powered.size()));
      for (std::size_t j = 0; j < powered.size(); ++j) {
        const double psi = std::exp(log_psi(static_cast<Eigen::Index>(j)));
        // dC/dlog(psi_j) = C o |d_j|^a / psi_j
        v.grad(static_cast<Eigen::Index>(j)) = 0.5 * (core.array() * c.array() * powered[j].array()).sum() / psi;
      }
    }
    return v;
  }

  // Bounded reparametrization: log psi = lo + (hi - lo) logistic(u).
  Eigen::VectorXd to_log_psi(const gsl_vector* u) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(u->size));
    for (std::size_t j = 0; j < u->size; ++j) {
      out(static_cast<Eigen::Index>(j)) = log_lo + (log_hi - log_lo) * logistic(gsl_vector_get(u, j));
    }
    return out;
  }
};

double gsl_f(const gsl_vector* u, void* params) {
  const auto* prof = static_cast<const Profile*>(params);
  const Profile::Value v = prof->evaluate(prof->to_log_psi(u), false);
  return v.ok ? -v.loglik : 1e300;
}

void gsl_fdf(const gsl_vector* u, void* params, double* f, gsl_vector* g) {
  const auto* prof = static_cast<const Profile*>(params);
  const Profile::Value v = prof->evaluate(prof->to_log_psi(u), true);
  if (!v.ok) {
    if (f) *f = 1e300;
    gsl_vector_set_zero(g);
    return;
  }
  if (f) *f = -v.loglik;
  for (std::size_t j = 0; j < u->size; ++j) {
    const double uj = gsl_vector_get(u, j);
    const double s = logistic(uj);
    gsl_vector_set(g, j, -v.grad(static_cast<Eigen::Index>(j)) * (prof->log_hi - prof->log_lo) * s * (1.0 - s));
  }
}

void gsl_df(const gsl_vector* u, void* params, gsl_vector* g) { gsl_fdf(u, params, nullptr, g); }

struct StartResult {
  bool ok = false;
  double loglik = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd log_psi;
};

StartResult run_start(const Profile& prof, const Eigen::VectorXd& u0, std::size_t max_iter) {
  const std::size_t d = static_cast<std::size_t>(u0.size());
  gsl_multimin_function_fdf fn;
  fn.n = d;
  fn.f = &gsl_f;
  fn.df = &gsl_df;
  fn.fdf = &gsl_fdf;
  fn.params = const_cast<Profile*>(&prof);

  gsl_vector* x = gsl_vector_alloc(d);
  for (std::size_t j = 0; j < d; ++j) gsl_vector_set(x, j, u0(static_cast<Eigen::Index>(j)));
  gsl_multimin_fdfminimizer* m = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, d);
  gsl_multimin_fdfminimizer_set(m, &fn, x, 0.1, 0.1);
  for (std::size_t it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fdfminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_gradient(m->gradient, 1e-6) == GSL_SUCCESS) break;
  }
  StartResult res;
  const Eigen::VectorXd log_psi = prof.to_log_psi(m->x);
  const Profile::Value v = prof.evaluate(log_psi, false);
  res.ok = v.ok;
  res.loglik = v.loglik;
  res.log_psi = log_psi;
  gsl_multimin_fdfminimizer_free(m);
  gsl_vector_free(x);
  return res;
}

}  // namespace

void EmulatorDesign::validate() const {
  const Eigen::Index n = inputs.rows();
  if (static_cast<std::size_t>(inputs.cols()) != p + k) throw ConfigError("emulator design: expected p + k input columns");
  if (outputs.size() != n) throw ConfigError("emulator design: one output per run is required");
  if (static_cast<std::size_t>(n) < p + k + 2) {
    std::ostringstream msg;
    msg << "emulator design: need at least p + k + 2 = " << (p + k + 2) << " runs, got " << n;
    throw ConfigError(msg.str());
  }
  if (!inputs.allFinite() || !outputs.allFinite()) throw ConfigError("emulator design: non-finite values");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (inputs.row(i) == inputs.row(j)) throw ConfigError("emulator design: duplicate runs");
    }
  }
}

FittedEmulator::FittedEmulator(EmulatorDesign design, std::vector<double> ranges,
                               double process_variance, double mean, double a)
    : design_(std::move(design)),
      ranges_(std::move(ranges)),
      process_variance_(process_variance),
      mean_(mean),
      a_(a) {
  design_.validate();
  KernelConfig{a_}.validate();
  if (ranges_.size() != design_.p + design_.k) throw ConfigError("emulator: one range per input dimension");
  for (double r : ranges_) {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("emulator: ranges must be positive");
  }
  if (!(process_variance_ > 0.0)) throw ConfigError("emulator: process variance must be positive");
  const ColumnScaling s = column_scaling(design_.inputs);
  lower_ = s.lower;
  span_ = s.span;
  scaled_design_ = apply_scaling(design_.inputs, s);
  rho_ = rho_from_ranges(ranges_, a_);
  chol_ = factorize_with_jitter(cross_correlation(scaled_design_, scaled_design_, rho_, a_));
  const Eigen::VectorXd r = design_.outputs.array() - mean_;
  weights_ = chol_.solve(r);
  const double n = static_cast<double>(r.size());
  log_marginal_ = -0.5 * (r.dot(weights_) / process_variance_ + chol_.log_det() +
                          n * std::log(2.0 * std::numbers::pi * process_variance_));
}

Eigen::MatrixXd FittedEmulator::scale(const Eigen::MatrixXd& raw) const {
  return apply_scaling(raw, ColumnScaling{lower_, span_});
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> FittedEmulator::predict(const Eigen::MatrixXd& points) const {
  if (static_cast<std::size_t>(points.cols()) != p() + k()) throw ConfigError("emulator: prediction points need p + k columns");
  const Eigen::MatrixXd z = scale(points);
  const Eigen::MatrixXd cross = cross_correlation(z, scaled_design_, rho_, a_);
  Eigen::VectorXd mean = cross * weights_;
  mean.array() += mean_;
  const Eigen::MatrixXd half = chol_.llt.matrixL().solve(cross.transpose());
  Eigen::MatrixXd cov = cross_correlation(z, z, rho_, a_) - half.transpose() * half;
  cov = (0.5 * (cov + cov.transpose())).eval();
  return {std::move(mean), std::move(cov)};
}

FittedEmulator fit_emulator(const EmulatorDesign& design, const EmulatorFitOptions& options) {
  design.validate();
  KernelConfig{options.a}.validate();
  if (options.starts == 0) throw ConfigError("emulator fit: need at least one start");
  if (!(options.min_range > 0.0 && options.min_range < options.max_range)) {
    throw ConfigError("emulator fit: invalid range bounds");
  }
  const std::size_t dims = design.p + design.k;
  const double spread = design.outputs.maxCoeff() - design.outputs.minCoeff();
  if (!(spread > 0.0)) {
    // Constant runs: no information on the ranges.
    return FittedEmulator(design, std::vector<double>(dims, std::sqrt(options.min_range * options.max_range)),
                          options.variance_floor, design.outputs(0), options.a);
  }

  const Eigen::MatrixXd scaled = apply_scaling(design.inputs, column_scaling(design.inputs));
  Profile prof;
  prof.scaled = &scaled;
  prof.outputs = &design.outputs;
  prof.a = options.a;
  prof.variance_floor = options.variance_floor;
  prof.log_lo = std::log(options.min_range);
  prof.log_hi = std::log(options.max_range);
  const Eigen::Index n = scaled.rows();
  for (std::size_t j = 0; j < dims; ++j) {
    Eigen::MatrixXd pw(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index l = 0; l < n; ++l) {
        pw(i, l) = std::pow(std::abs(scaled(i, static_cast<Eigen::Index>(j)) - scaled(l, static_cast<Eigen::Index>(j))), options.a);
      }
    }
    prof.powered.push_back(std::move(pw));
  }

  Rng rng = make_stream(options.seed, 0, StreamTag::kEmulator);
  const Eigen::MatrixXd grid = lhd(options.starts, dims, rng).matrix();
  gsl_set_error_handler_off();
  std::vector<StartResult> results(options.starts);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t s = 0; s < options.starts; ++s) {
    Eigen::VectorXd u0(static_cast<Eigen::Index>(dims));
    for (std::size_t j = 0; j < dims; ++j) {
      u0(static_cast<Eigen::Index>(j)) = logit(0.05 + 0.9 * grid(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)));
    }
    results[s] = run_start(prof, u0, options.max_iterations);
  }
  std::size_t best = options.starts;
  for (std::size_t s = 0; s < options.starts; ++s) {
    if (results[s].ok && (best == options.starts || results[s].loglik > results[best].loglik)) best = s;
  }
  if (best == options.starts) throw NumericError("emulator fit: every optimizer start failed");

  const Profile::Value v = prof.evaluate(results[best].log_psi, false);
  std::vector<double> ranges(dims);
  for (std::size_t j = 0; j < dims; ++j) ranges[j] = std::exp(results[best].log_psi(static_cast<Eigen::Index>(j)));
  return FittedEmulator(design, std::move(ranges), v.variance, v.mean, options.a);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> emulator_mean_cov(const FittedEmulator& em,
                                                              const Eigen::MatrixXd& x,
                                                              std::span<const double> theta) {
  if (static_cast<std::size_t>(x.cols()) != em.p() || theta.size() != em.k()) {
    throw ConfigError("emulator_mean_cov: field inputs or theta have the wrong size");
  }
  Eigen::MatrixXd points(x.rows(), x.cols() + static_cast<Eigen::Index>(theta.size()));
  points.leftCols(x.cols()) = x;
  for (std::size_t j = 0; j < theta.size(); ++j) points.col(x.cols() + static_cast<Eigen::Index>(j)).setConstant(theta[j]);
  return em.predict(points);
}

double extended_log_likelihood(const FieldObservations& data, const FittedEmulator& em,
                               std::span<const double> theta, const RhoVector& rho, double sigma2,
                               double sigma02, double sigma_f2, const KernelConfig& kernel) {
  if (sigma_f2 < 0.0) throw ConfigError("extended likelihood: emulator variance must be >= 0");
  const auto [mean, k] = emulator_mean_cov(em, data.model_inputs, theta);
  Eigen::MatrixXd cov = assemble_covariance(corr_matrix(data.design, rho, kernel.a), sigma2, sigma02);
  cov += sigma_f2 * k;
  return mvn_logpdf(data.y, mean, cov);
}

EmulatorMean::EmulatorMean(std::shared_ptr<const FittedEmulator> em, Eigen::MatrixXd field_inputs,
                           std::optional<std::vector<double>> cache_theta)
    : em_(std::move(em)), inputs_(std::move(field_inputs)), cached_theta_(std::move(cache_theta)) {
  if (!em_) throw ConfigError("EmulatorMean: null emulator");
  if (cached_theta_) cached_ = mean_and_extra(*cached_theta_);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> EmulatorMean::mean_and_extra(std::span<const double> theta) const {
  if (cached_theta_ && cached_.first.size() > 0 &&
      std::equal(theta.begin(), theta.end(), cached_theta_->begin(), cached_theta_->end())) {
    return cached_;
  }
  auto [mean, k] = emulator_mean_cov(*em_, inputs_, theta);
  return {std::move(mean), em_->process_variance() * k};
}

Eigen::VectorXd EmulatorMean::mean(std::span<const double> theta) const { return mean_and_extra(theta).first; }

Eigen::MatrixXd EmulatorMean::extra_covariance(std::span<const double> theta) const {
  return mean_and_extra(theta).second;
}

std::string emulator_to_json(const FittedEmulator& em) {
  Json j;
  j["kind"] = "pips-emulator";
  j["schema_version"] = 1;
  j["a"] = em.a();
  j["p"] = em.p();
  j["k"] = em.k();
  j["ranges"] = em.ranges();
  j["process_variance"] = em.process_variance();
  j["mean"] = em.mean();
  Json rows = Json::array();
  const EmulatorDesign& d = em.design();
  for (Eigen::Index i = 0; i < d.inputs.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index c = 0; c < d.inputs.cols(); ++c) row.push_back(d.inputs(i, c));
    rows.push_back(row);
  }
  j["design"]["inputs"] = rows;
  j["design"]["outputs"] = std::vector<double>(d.outputs.data(), d.outputs.data() + d.outputs.size());
  return j.dump(2);
}

FittedEmulator emulator_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    throw IoError(std::string("emulator JSON: ") + e.what());
  }
  try {
    if (j.at("kind") != "pips-emulator") throw IoError("emulator JSON: wrong document kind");
    if (j.value("schema_version", 0) != 1) throw IoError("emulator JSON: unsupported schema_version");
    EmulatorDesign d;
    d.p = j.at("p").get<std::size_t>();
    d.k = j.at("k").get<std::size_t>();
    const auto rows = j.at("design").at("inputs").get<std::vector<std::vector<double>>>();
    const auto outputs = j.at("design").at("outputs").get<std::vector<double>>();
    d.inputs.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.p + d.k));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != d.p + d.k) throw IoError("emulator JSON: ragged design rows");
      for (std::size_t c = 0; c < rows[i].size(); ++c) d.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
    d.outputs = Eigen::Map<const Eigen::VectorXd>(outputs.data(), static_cast<Eigen::Index>(outputs.size()));
    return FittedEmulator(std::move(d), j.at("ranges").get<std::vector<double>>(),
                          j.at("process_variance").get<double>(), j.at("mean").get<double>(),
                          j.at("a").get<double>());
  } catch (const Json::exception& e) {
    throw IoError(std::string("emulator JSON: ") + e.what());
  }
}

}  // namespace pips
