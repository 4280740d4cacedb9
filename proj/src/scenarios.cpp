#include "pips/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "pips/errors.hpp"

namespace pips {

namespace {

double abs_term(double v, double theta) { return (std::abs(4.0 * v - 2.0) + theta) / (1.0 + theta); }

}  // namespace

Design lhd(std::size_t n, std::size_t p, Rng& rng) {
  if (n < 1 || p < 1) throw ConfigError("lhd: n and p must be at least 1");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  std::vector<std::size_t> perm(n);
  for (std::size_t l = 0; l < p; ++l) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double v = (static_cast<double>(perm[i]) + unif(rng)) / static_cast<double>(n);
      // Guards the stratum upper edge against rounding up to (perm+1)/n.
      const double hi = std::nextafter((static_cast<double>(perm[i]) + 1.0) / static_cast<double>(n), 0.0);
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = std::min(v, hi);
    }
  }
  return Design(std::move(x));
}

double model_f(std::span<const double> x, std::span<const double> theta,
               std::span<const std::size_t> dims) {
  if (theta.size() < dims.size()) throw ConfigError("model_f: one theta per model input is required");
  double s = 0.0;
  for (std::size_t j = 0; j < dims.size(); ++j) {
    if (dims[j] >= x.size()) throw ConfigError("model_f: input index out of range");
    s += abs_term(x[dims[j]], theta[j]);
  }
  return s;
}

double bias_delta(std::span<const double> x) {
  if (x.size() < 6) throw ConfigError("bias_delta: need at least 6 inputs");
  const double one_minus_x6 = 1.0 - x[5];
  return std::sin(2.0 * std::numbers::pi * x[0] * x[4]) + x[1] * x[1] * x[1] +
         one_minus_x6 * one_minus_x6 * one_minus_x6;
}

double reality_zeta(int structure, bool x1_squared, std::span<const double> x,
                    std::span<const double> theta) {
  if (x.size() < 5 || theta.size() < 5) throw ConfigError("reality_zeta: need 5 inputs and 5 thetas");
  const double x1 = x1_squared ? x[0] * x[0] : x[0];
  switch (structure) {
    case 1:
      return abs_term(x1, theta[0]) + abs_term(x[1], theta[1]) + abs_term(x[2], theta[2]);
    case 2:
      return abs_term(x1, theta[0]) + abs_term(x[2], theta[2]);
    case 3:
      return abs_term(x1, theta[0]) + abs_term(x[1], theta[1]) + abs_term(x[2], theta[2]) +
             abs_term(x[3], theta[3]);
    case 4:
      return abs_term(x1, theta[0]) + abs_term(x[1], theta[1]) + abs_term(x[4], theta[4]);
    default:
      throw ConfigError("reality_zeta: structure must be 1..4");
  }
}

double scenario_zeta(int case_id, std::span<const double> x, std::span<const double> theta) {
  if (case_id < 1 || case_id > 4) throw ConfigError("scenario case must be 1..4");
  return reality_zeta(case_id, case_id == 1, x, theta);
}

double composite_zeta(int second_case, std::span<const double> x, std::span<const double> theta) {
  if (second_case < 2 || second_case > 4) throw ConfigError("composite scenario combines case 1 with 2, 3 or 4");
  return reality_zeta(second_case, true, x, theta);
}

std::vector<double> ScenarioDefinition::model_theta() const {
  return std::vector<double>(true_theta.begin(),
                             true_theta.begin() + static_cast<std::ptrdiff_t>(model_dims.size()));
}

std::vector<std::string> scenario_ids() {
  return {"s41", "s42-1", "s42-2", "s42-3", "s42-4", "s42-12", "s42-13", "s42-14"};
}

ScenarioDefinition scenario_by_id(const std::string& id) {
  ScenarioDefinition def;
  def.id = id;
  if (id == "s41") {
    def.p = 8;
    def.n = 50;
    def.true_theta = {0.3, 0.4, 0.5, 0.6};
    def.model_dims = {0, 1, 2, 3};
    def.inputs = InputDistribution::kLatinHypercube;
    def.truth = {0, 1, 4, 5};
    const std::vector<std::size_t> dims = def.model_dims;
    def.reality = [dims](std::span<const double> x, std::span<const double> theta) {
      return model_f(x, theta, dims) + bias_delta(x);
    };
    return def;
  }

  def.p = 5;
  def.n = 100;
  def.true_theta = {0.4, 0.5, 0.6, 0.7, 0.8};
  def.model_dims = {0, 1, 2};
  def.inputs = InputDistribution::kUniformCorrelated;
  int structure = 0;
  bool squared = false;
  if (id == "s42-1") {
    structure = 1, squared = true, def.truth = {0};
  } else if (id == "s42-2") {
    structure = 2, def.truth = {1};
  } else if (id == "s42-3") {
    structure = 3, def.truth = {3};
  } else if (id == "s42-4") {
    structure = 4, def.truth = {2, 4};
  } else if (id == "s42-12") {
    structure = 2, squared = true, def.truth = {0, 1};
  } else if (id == "s42-13") {
    structure = 3, squared = true, def.truth = {0, 3};
  } else if (id == "s42-14") {
    structure = 4, squared = true, def.truth = {0, 2, 4};
  } else {
    throw ConfigError("unknown scenario '" + id + "'");
  }
  def.reality = [structure, squared](std::span<const double> x, std::span<const double> theta) {
    return reality_zeta(structure, squared, x, theta);
  };
  return def;
}

double ScenarioModel::evaluate(std::span<const double> x, std::span<const double> theta) const {
  return model_f(x, theta, dims_);
}

std::shared_ptr<const ComputerModel> scenario_model(const ScenarioDefinition& def) {
  return std::make_shared<ScenarioModel>(def.model_dims);
}

Dataset gen_dataset(const ScenarioDefinition& def, std::uint64_t seed) {
  if (!def.reality || def.n == 0 || def.p == 0) throw ConfigError("gen_dataset: incomplete scenario");
  Rng rng = make_stream(seed, 0, StreamTag::kDataset);
  const Eigen::Index n = static_cast<Eigen::Index>(def.n);
  const Eigen::Index p = static_cast<Eigen::Index>(def.p);

  Eigen::MatrixXd x;
  if (def.inputs == InputDistribution::kLatinHypercube) {
    x = lhd(def.n, def.p, rng).matrix();
  } else {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const CorrelationSpec& cs = def.correlation;
    if (cs.source >= def.p || cs.target >= def.p || cs.source == cs.target) {
      throw ConfigError("gen_dataset: invalid correlated pair");
    }
    const boost::math::normal_distribution<double> std_normal;
    x.resize(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index l = 0; l < p; ++l) x(i, l) = unif(rng);
      const double src = x(i, static_cast<Eigen::Index>(cs.source));
      const double z = normal(rng);
      double v;
      if (cs.method == CorrelationMethod::kClamp) {
        v = std::clamp(src + cs.tau * z, 0.0, 1.0);
      } else {
        const double g = boost::math::quantile(std_normal, std::clamp(src, 1e-12, 1.0 - 1e-12));
        v = boost::math::cdf(std_normal, cs.copula_rho * g + std::sqrt(1.0 - cs.copula_rho * cs.copula_rho) * z);
      }
      x(i, static_cast<Eigen::Index>(cs.target)) = v;
    }
  }

  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::VectorXd y(n);
  std::vector<double> row(def.p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index l = 0; l < p; ++l) row[static_cast<std::size_t>(l)] = x(i, l);
    const double eps = def.noise_sd > 0.0 ? def.noise_sd * noise(rng) : 0.0;
    y(i) = def.reality(row, def.true_theta) + eps;
  }

  Dataset ds;
  ds.scenario_id = def.id;
  ds.seed = seed;
  ds.design = Design(std::move(x));
  ds.y = std::move(y);
  ds.truth = def.truth;
  ds.true_theta = def.true_theta;
  ds.model_theta = def.model_theta();
  return ds;
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t rep) {
  return derive_seed(master, rep, StreamTag::kDataset);
}

}  // namespace pips
