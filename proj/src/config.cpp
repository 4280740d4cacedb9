#include "pips/config.hpp"

#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pips/errors.hpp"
#include "pips/io.hpp"
#include "pips/screening.hpp"

namespace pips {

namespace {

namespace pt = boost::property_tree;

const std::set<std::string> kKnownKeys = {
    "schema_version", "seed",
    "kernel.a",
    "spike.alpha", "spike.alpha_per_input",
    "prior.sigma2_shape", "prior.sigma2_rate", "prior.sigma02_shape", "prior.sigma02_rate",
    "prior.theta_lower", "prior.theta_upper",
    "sampler.n_mwg", "sampler.n_mh", "sampler.burn_in", "sampler.thinning", "sampler.initial_step",
    "sampler.adapt_steps", "sampler.adapt_interval", "sampler.target_acceptance", "sampler.mh_scale",
    "model_space.tau",
    "screening.threshold", "screening.pairwise",
    "analysis.calibrate", "analysis.emulator", "analysis.model", "analysis.scenario",
    "analysis.emulator_design", "analysis.emulator_starts", "analysis.theta_file",
    "analysis.scale_inputs", "analysis.normalize_output",
    "rdvs.repetitions", "rdvs.percentiles",
};

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell.substr(b), &used);
    } catch (const std::exception&) {
      throw ConfigError("config: " + key + ": not a number list");
    }
    if (cell.find_first_not_of(" \t", b + used) != std::string::npos) {
      throw ConfigError("config: " + key + ": not a number list");
    }
    out.push_back(v);
  }
  return out;
}

std::string format_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += io::format_double(v[i]);
  }
  return out;
}

template <class T>
T get(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto node = tree.get_optional<std::string>(key);
  if (!node) return fallback;
  if constexpr (std::is_same_v<T, bool>) {
    const std::string& s = *node;
    if (s == "true" || s == "on" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "off" || s == "no" || s == "0") return false;
    throw ConfigError("config: " + key + ": expected a boolean, got '" + s + "'");
  } else if constexpr (std::is_same_v<T, std::string>) {
    return *node;
  } else {
    try {
      if constexpr (std::is_floating_point_v<T>) {
        std::size_t used = 0;
        const double v = std::stod(*node, &used);
        if (used != node->size()) throw std::invalid_argument("trailing");
        return v;
      } else {
        if (!node->empty() && node->front() == '-') throw std::invalid_argument("negative");
        std::size_t used = 0;
        const auto v = std::stoull(*node, &used);
        if (used != node->size()) throw std::invalid_argument("trailing");
        return static_cast<T>(v);
      }
    } catch (const std::exception&) {
      throw ConfigError("config: " + key + ": invalid value '" + *node + "'");
    }
  }
}

void check_keys(const pt::ptree& tree) {
  for (const auto& [name, child] : tree) {
    if (child.empty()) {
      if (!kKnownKeys.count(name)) throw ConfigError("config: unknown key '" + name + "'");
      continue;
    }
    for (const auto& [key, leaf] : child) {
      const std::string full = name + "." + key;
      if (!kKnownKeys.count(full)) throw ConfigError("config: unknown key '" + full + "'");
    }
  }
}

const char* flag(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string model_source_name(ModelSource source) {
  switch (source) {
    case ModelSource::kScenario: return "scenario";
    case ModelSource::kColumn: return "column";
    case ModelSource::kZero: return "zero";
    case ModelSource::kEmulator: return "emulator";
  }
  return "scenario";
}

ModelSource parse_model_source(const std::string& name) {
  if (name == "scenario") return ModelSource::kScenario;
  if (name == "column") return ModelSource::kColumn;
  if (name == "zero") return ModelSource::kZero;
  if (name == "emulator") return ModelSource::kEmulator;
  throw ConfigError("config: analysis.model must be one of scenario, column, zero, emulator; got '" + name + "'");
}

void AnalysisConfig::validate() const {
  if (schema_version != kConfigSchemaVersion) {
    throw ConfigError("config: unsupported schema_version " + std::to_string(schema_version) +
                      " (this build reads version " + std::to_string(kConfigSchemaVersion) + ")");
  }
  kernel.validate();
  if (!(spike.alpha >= 1.0)) throw ConfigError("config: spike.alpha must be >= 1");
  prior.validate();
  sampler_config().validate();
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("config: screening.threshold must be in (0, 1)");
  if (emulator != (model == ModelSource::kEmulator)) {
    throw ConfigError("config: analysis.emulator = true goes with analysis.model = emulator");
  }
  if (emulator && emulator_design.empty()) throw ConfigError("config: the emulator needs analysis.emulator_design");
  if (emulator && emulator_starts == 0) throw ConfigError("config: analysis.emulator_starts must be positive");
  if (model == ModelSource::kColumn && calibrate) {
    throw ConfigError("config: a model column has no theta to calibrate; set analysis.calibrate = false");
  }
  if (rdvs_repetitions < 2) throw ConfigError("config: rdvs.repetitions must be at least 2");
  for (double q : rdvs_percentiles) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("config: rdvs.percentiles must lie in [0, 1]");
  }
}

void AnalysisConfig::validate_for(std::size_t p, std::size_t k) const {
  validate();
  check_enumeration_cap(p);
  spike.validate(p);
  if (!tau.empty()) ModelSpacePrior{tau}.validate(p);
  if (!prior.theta_bounds.empty() && prior.theta_bounds.size() != k) {
    throw ConfigError("config: prior.theta_lower/theta_upper need " + std::to_string(k) + " entries");
  }
}

SamplerConfig AnalysisConfig::sampler_config() const {
  SamplerConfig s = sampler;
  s.seed = seed;
  return s;
}

AnalysisConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ptree_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  check_keys(tree);
  AnalysisConfig c;
  c.schema_version = get<int>(tree, "schema_version", -1);
  if (c.schema_version < 0) throw ConfigError("config: schema_version is required");
  c.seed = get<std::uint64_t>(tree, "seed", c.seed);
  c.kernel.a = get<double>(tree, "kernel.a", c.kernel.a);
  c.spike.alpha = get<double>(tree, "spike.alpha", c.spike.alpha);
  c.spike.per_input = parse_list(get<std::string>(tree, "spike.alpha_per_input", ""), "spike.alpha_per_input");
  c.prior.sigma2.shape = get<double>(tree, "prior.sigma2_shape", c.prior.sigma2.shape);
  c.prior.sigma2.rate = get<double>(tree, "prior.sigma2_rate", c.prior.sigma2.rate);
  c.prior.sigma02.shape = get<double>(tree, "prior.sigma02_shape", c.prior.sigma02.shape);
  c.prior.sigma02.rate = get<double>(tree, "prior.sigma02_rate", c.prior.sigma02.rate);
  const auto lo = parse_list(get<std::string>(tree, "prior.theta_lower", ""), "prior.theta_lower");
  const auto hi = parse_list(get<std::string>(tree, "prior.theta_upper", ""), "prior.theta_upper");
  if (lo.size() != hi.size()) throw ConfigError("config: prior.theta_lower and theta_upper differ in length");
  for (std::size_t j = 0; j < lo.size(); ++j) c.prior.theta_bounds.push_back({lo[j], hi[j]});
  SamplerConfig& s = c.sampler;
  s.n_mwg = get<std::size_t>(tree, "sampler.n_mwg", s.n_mwg);
  s.n_mh = get<std::size_t>(tree, "sampler.n_mh", s.n_mh);
  s.burn_in = get<std::size_t>(tree, "sampler.burn_in", s.burn_in);
  s.thinning = get<std::size_t>(tree, "sampler.thinning", s.thinning);
  s.initial_step = get<double>(tree, "sampler.initial_step", s.initial_step);
  s.adapt_steps = get<bool>(tree, "sampler.adapt_steps", s.adapt_steps);
  s.adapt_interval = get<std::size_t>(tree, "sampler.adapt_interval", s.adapt_interval);
  s.target_acceptance = get<double>(tree, "sampler.target_acceptance", s.target_acceptance);
  s.mh_scale = get<double>(tree, "sampler.mh_scale", s.mh_scale);
  c.tau = parse_list(get<std::string>(tree, "model_space.tau", ""), "model_space.tau");
  c.threshold = get<double>(tree, "screening.threshold", c.threshold);
  c.pairwise = get<bool>(tree, "screening.pairwise", c.pairwise);
  c.calibrate = get<bool>(tree, "analysis.calibrate", c.calibrate);
  c.emulator = get<bool>(tree, "analysis.emulator", c.emulator);
  c.model = parse_model_source(get<std::string>(tree, "analysis.model", c.emulator ? "emulator" : "scenario"));
  c.scenario = get<std::string>(tree, "analysis.scenario", c.scenario);
  c.emulator_design = get<std::string>(tree, "analysis.emulator_design", c.emulator_design);
  c.emulator_starts = get<std::size_t>(tree, "analysis.emulator_starts", c.emulator_starts);
  c.theta_file = get<std::string>(tree, "analysis.theta_file", c.theta_file);
  c.scale_inputs = get<bool>(tree, "analysis.scale_inputs", c.scale_inputs);
  c.normalize_output = get<bool>(tree, "analysis.normalize_output", c.normalize_output);
  c.rdvs_repetitions = get<std::size_t>(tree, "rdvs.repetitions", c.rdvs_repetitions);
  if (tree.get_optional<std::string>("rdvs.percentiles")) {
    c.rdvs_percentiles = parse_list(get<std::string>(tree, "rdvs.percentiles", ""), "rdvs.percentiles");
  }
  c.validate();
  return c;
}

AnalysisConfig load_config(const std::string& path) { return parse_config(io::read_text(path)); }

std::string config_to_ini(const AnalysisConfig& c) {
  std::vector<double> lo, hi;
  for (const auto& b : c.prior.theta_bounds) {
    lo.push_back(b.lower);
    hi.push_back(b.upper);
  }
  std::ostringstream out;
  out << "schema_version = " << c.schema_version << "\n"
      << "seed = " << c.seed << "\n\n"
      << "[kernel]\n"
      << "a = " << io::format_double(c.kernel.a) << "\n\n"
      << "[spike]\n"
      << "alpha = " << io::format_double(c.spike.alpha) << "\n"
      << "alpha_per_input = " << format_list(c.spike.per_input) << "\n\n"
      << "[prior]\n"
      << "sigma2_shape = " << io::format_double(c.prior.sigma2.shape) << "\n"
      << "sigma2_rate = " << io::format_double(c.prior.sigma2.rate) << "\n"
      << "sigma02_shape = " << io::format_double(c.prior.sigma02.shape) << "\n"
      << "sigma02_rate = " << io::format_double(c.prior.sigma02.rate) << "\n"
      << "theta_lower = " << format_list(lo) << "\n"
      << "theta_upper = " << format_list(hi) << "\n\n"
      << "[sampler]\n"
      << "n_mwg = " << c.sampler.n_mwg << "\n"
      << "n_mh = " << c.sampler.n_mh << "\n"
      << "burn_in = " << c.sampler.burn_in << "\n"
      << "thinning = " << c.sampler.thinning << "\n"
      << "initial_step = " << io::format_double(c.sampler.initial_step) << "\n"
      << "adapt_steps = " << flag(c.sampler.adapt_steps) << "\n"
      << "adapt_interval = " << c.sampler.adapt_interval << "\n"
      << "target_acceptance = " << io::format_double(c.sampler.target_acceptance) << "\n"
      << "mh_scale = " << io::format_double(c.sampler.mh_scale) << "\n\n"
      << "[model_space]\n"
      << "tau = " << format_list(c.tau) << "\n\n"
      << "[screening]\n"
      << "threshold = " << io::format_double(c.threshold) << "\n"
      << "pairwise = " << flag(c.pairwise) << "\n\n"
      << "[analysis]\n"
      << "calibrate = " << flag(c.calibrate) << "\n"
      << "emulator = " << flag(c.emulator) << "\n"
      << "model = " << model_source_name(c.model) << "\n"
      << "scenario = " << c.scenario << "\n"
      << "emulator_design = " << c.emulator_design << "\n"
      << "emulator_starts = " << c.emulator_starts << "\n"
      << "theta_file = " << c.theta_file << "\n"
      << "scale_inputs = " << flag(c.scale_inputs) << "\n"
      << "normalize_output = " << flag(c.normalize_output) << "\n\n"
      << "[rdvs]\n"
      << "repetitions = " << c.rdvs_repetitions << "\n"
      << "percentiles = " << format_list(c.rdvs_percentiles) << "\n";
  return out.str();
}

}  // namespace pips
