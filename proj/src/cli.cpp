#include "pips/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "pips/emulator.hpp"
#include "pips/errors.hpp"
#include "pips/stats.hpp"

namespace pips::cli {

namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

std::vector<double> read_theta_file(const std::string& path) {
  Json j;
  try {
    j = Json::parse(io::read_text(path));
  } catch (const Json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  for (const char* key : {"theta", "model_theta"}) {
    if (j.is_object() && j.contains(key) && j.at(key).is_array()) {
      try {
        return j.at(key).get<std::vector<double>>();
      } catch (const Json::exception& e) {
        throw IoError(path + ": " + e.what());
      }
    }
  }
  throw IoError(path + ": expected a JSON object with a \"theta\" array");
}

std::optional<io::DatasetMeta> sidecar_for(const std::string& csv_path) {
  fs::path json = fs::path(csv_path).replace_extension(".json");
  if (!fs::exists(json)) return std::nullopt;
  try {
    return io::read_dataset_meta(json.string());
  } catch (const IoError&) {
    return std::nullopt;
  }
}

ScreeningOptions screening_options(const AnalysisConfig& c) {
  ScreeningOptions o;
  o.spike = c.spike;
  o.tau = c.tau;
  o.threshold = c.threshold;
  o.pairwise = c.pairwise;
  return o;
}

std::string percent_label(double q) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "q%g%%", q * 100.0);
  return buf;
}

std::string threshold_label(double th) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "th%g", th);
  return buf;
}

Json prepared_metadata(const PreparedAnalysis& a, const std::string& data_path) {
  Json j;
  j["kind"] = "pips-run-metadata";
  j["schema_version"] = 1;
  j["data"] = data_path;
  j["inputs"] = a.input_names;
  j["input_scaling"] = {{"lower", a.input_lower}, {"span", a.input_span}};
  j["output_normalization"] = {{"center", a.y_center}, {"scale", a.y_scale}};
  j["model"] = model_source_name(a.config.model);
  j["scenario"] = a.config.scenario;
  j["calibrate"] = a.config.calibrate;
  j["fixed_theta"] = a.fixed_theta;
  j["seed"] = a.config.seed;
  return j;
}

void write_run_files(const std::string& out_dir, const PreparedAnalysis& a, const Json& metadata) {
  io::write_text(join(out_dir, "config.ini"), config_to_ini(a.config));
  io::write_text(join(out_dir, "metadata.json"), metadata.dump(2) + "\n");
}

PreparedAnalysis load_prepared(const ScreenOptions& options) {
  const io::FieldTable table = io::read_field_table(options.data_path);
  return prepare_analysis(table, options.config, sidecar_for(options.data_path));
}

}  // namespace

std::string default_out_dir() {
  const char* env = std::getenv(kOutDirEnv);
  return (env && *env) ? std::string(env) : std::string("pips-out");
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const NumericError*>(&e)) return 3;
  if (dynamic_cast<const IoError*>(&e)) return 4;
  return 1;
}

std::vector<std::string> cmd_simulate(const SimulateOptions& options) {
  const ScenarioDefinition def = scenario_by_id(options.scenario);
  if (options.reps == 0) throw ConfigError("simulate: --reps must be at least 1");
  const std::string dir = options.out_dir.empty() ? default_out_dir() : options.out_dir;
  std::vector<std::string> written;
  for (std::size_t r = 0; r < options.reps; ++r) {
    const Dataset ds = gen_dataset(def, replication_seed(options.seed, r));
    char stem[64];
    std::snprintf(stem, sizeof stem, "%s_rep%03zu", def.id.c_str(), r + 1);
    const std::string csv = join(dir, std::string(stem) + ".csv");
    io::write_dataset(ds, csv, join(dir, std::string(stem) + ".json"));
    written.push_back(csv);
  }
  return written;
}

PreparedAnalysis prepare_analysis(const io::FieldTable& table, const AnalysisConfig& config,
                                  const std::optional<io::DatasetMeta>& meta) {
  config.validate();
  PreparedAnalysis a;
  a.config = config;
  a.input_names = table.input_names;
  const Eigen::Index n = table.x.rows();
  const auto p = static_cast<std::size_t>(table.x.cols());
  if (n < 3) throw ConfigError("data: need at least 3 observations");
  check_enumeration_cap(p);
  config.spike.validate(p);

  Eigen::MatrixXd scaled = table.x;
  for (std::size_t l = 0; l < p; ++l) {
    const auto col = table.x.col(static_cast<Eigen::Index>(l));
    double lower = 0.0, span = 1.0;
    if (config.scale_inputs) {
      lower = col.minCoeff();
      span = col.maxCoeff() - lower;
      if (!(span > 0.0)) throw ConfigError("data: input '" + table.input_names[l] + "' is constant");
      scaled.col(static_cast<Eigen::Index>(l)) = (col.array() - lower) / span;
    } else if (col.minCoeff() < 0.0 || col.maxCoeff() > 1.0) {
      throw ConfigError("data: input '" + table.input_names[l] + "' lies outside [0, 1]; enable analysis.scale_inputs");
    }
    a.input_lower.push_back(lower);
    a.input_span.push_back(span);
  }

  Eigen::VectorXd y = table.y;
  if (config.normalize_output) {
    a.y_center = y.mean();
    a.y_scale = std::sqrt((y.array() - a.y_center).square().sum() / static_cast<double>(n - 1));
    if (!(a.y_scale > 0.0)) throw ConfigError("data: y is constant; disable analysis.normalize_output");
    y = (y.array() - a.y_center) / a.y_scale;
  }
  a.data = FieldObservations(Design(scaled), table.x, y);

  std::shared_ptr<const FieldMean> mean;
  std::vector<double> fixed;
  auto resolve_theta = [&](std::size_t k) {
    if (config.calibrate || k == 0) return;
    if (!a.config.theta_file.empty()) {
      fixed = read_theta_file(a.config.theta_file);
    } else if (meta && meta->model_theta.size() == k) {
      fixed = meta->model_theta;
    } else {
      throw ConfigError("calibration is off: supply theta with --theta or analysis.theta_file");
    }
    if (fixed.size() != k) {
      throw ConfigError("theta file has " + std::to_string(fixed.size()) + " values; the model needs " + std::to_string(k));
    }
  };

  switch (config.model) {
    case ModelSource::kScenario: {
      if (a.config.scenario.empty()) {
        if (!meta) throw ConfigError("no scenario given and no dataset sidecar found; set analysis.scenario");
        a.config.scenario = meta->scenario_id;
      }
      const ScenarioDefinition def = scenario_by_id(a.config.scenario);
      if (def.p != p) {
        throw ConfigError("scenario " + def.id + " has " + std::to_string(def.p) + " inputs; the data have " + std::to_string(p));
      }
      a.k = def.model_dims.size();
      resolve_theta(a.k);
      std::optional<std::vector<double>> cache;
      if (!config.calibrate) cache = fixed;
      mean = std::make_shared<DirectModelMean>(scenario_model(def), table.x, cache);
      break;
    }
    case ModelSource::kColumn:
      if (!table.f) throw ConfigError("analysis.model = column needs an 'f' column in the data");
      mean = std::make_shared<FixedMean>(*table.f);
      break;
    case ModelSource::kZero:
      mean = std::make_shared<FixedMean>(Eigen::VectorXd::Zero(n));
      break;
    case ModelSource::kEmulator: {
      const EmulatorDesign design = io::read_emulator_design(config.emulator_design);
      if (design.p != p) throw ConfigError("emulator design has a different number of inputs than the data");
      EmulatorFitOptions fit;
      fit.a = config.kernel.a;
      fit.seed = config.seed;
      fit.starts = config.emulator_starts;
      auto em = std::make_shared<const FittedEmulator>(fit_emulator(design, fit));
      a.k = em->k();
      resolve_theta(a.k);
      std::optional<std::vector<double>> cache;
      if (!config.calibrate && a.k > 0) cache = fixed;
      mean = std::make_shared<EmulatorMean>(em, table.x, cache);
      break;
    }
  }
  if (config.normalize_output) mean = std::make_shared<AffineMean>(mean, a.y_center, a.y_scale);
  a.mean = std::move(mean);
  a.fixed_theta = fixed;

  a.prior = config.prior;
  if (config.calibrate && a.k > 0) {
    if (a.prior.theta_bounds.empty()) a.prior.theta_bounds.assign(a.k, Bounds{0.0, 1.0});
  } else {
    a.prior.theta_bounds.clear();
  }
  a.config.validate_for(p, a.k);
  return a;
}

ScreeningResult cmd_screen_pips(const ScreenOptions& options, std::ostream& out) {
  const PreparedAnalysis a = load_prepared(options);
  check_enumeration_cap(a.input_names.size());
  const std::string dir = options.out_dir.empty() ? default_out_dir() : options.out_dir;
  const Chain chain = run_full_sampler(a.data, a.mean, a.prior, a.config.kernel, a.config.sampler_config(), a.fixed_theta);
  const ScreeningResult result = screen_chain(chain, screening_options(a.config));

  io::write_chain(join(dir, "chain.csv"), chain);
  const std::string json = io::screening_to_json(result);
  io::screening_from_json(json);
  io::write_text(join(dir, "screening.json"), json);
  io::write_text(join(dir, "pips.csv"), io::screening_summary_csv(result, a.input_names));
  std::string long_csv = "replication,input,pip\n";
  for (std::size_t l = 0; l < result.p; ++l) {
    long_csv += "1," + a.input_names[l] + "," + io::format_double(result.inclusion_probs[l]) + "\n";
  }
  io::write_text(join(dir, "pips_long.csv"), long_csv);
  Json meta = prepared_metadata(a, options.data_path);
  meta["sampler"] = {{"mwg_acceptance", chain.mwg_acceptance}, {"mh_acceptance", chain.mh_acceptance},
                     {"ess", chain.ess}, {"draws", chain.samples.size()}};
  write_run_files(dir, a, meta);

  std::vector<std::size_t> order(result.p);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return result.inclusion_probs[i] > result.inclusion_probs[j]; });
  char line[160];
  out << "input          pip      active\n";
  for (std::size_t l : order) {
    std::snprintf(line, sizeof line, "%-12s %7.4f   %s\n", a.input_names[l].c_str(), result.inclusion_probs[l],
                  result.active[l] ? "yes" : "no");
    out << line;
  }
  std::snprintf(line, sizeof line, "threshold %g, %zu draws, MH acceptance %.3f\n", result.threshold, result.draws,
                chain.mh_acceptance);
  out << line;
  return result;
}

RdvsResult cmd_screen_rdvs(const ScreenOptions& options, std::ostream& out) {
  const PreparedAnalysis a = load_prepared(options);
  const std::string dir = options.out_dir.empty() ? default_out_dir() : options.out_dir;
  RdvsConfig rc;
  rc.repetitions = a.config.rdvs_repetitions;
  rc.percentiles = a.config.rdvs_percentiles;
  rc.sampler = a.config.sampler_config();
  rc.master_seed = a.config.seed;
  rc.partial_results_path = join(dir, "rdvs_partial.csv");
  const RdvsResult result = rdvs_run(a.data, a.mean, a.prior, a.config.kernel, rc, a.fixed_theta);

  io::write_text(join(dir, "rdvs_reference.csv"), io::rdvs_reference_csv(result));
  const std::string json = io::rdvs_to_json(result, a.input_names);
  io::rdvs_from_json(json);
  io::write_text(join(dir, "rdvs.json"), json);
  write_run_files(dir, a, prepared_metadata(a, options.data_path));

  char line[160];
  out << "input          median rho";
  for (double q : result.percentiles) {
    std::snprintf(line, sizeof line, " %7s", percent_label(q).c_str());
    out << line;
  }
  out << "\n";
  for (std::size_t l = 0; l < result.input_medians.size(); ++l) {
    std::snprintf(line, sizeof line, "%-12s %11.4f", a.input_names[l].c_str(), result.input_medians[l]);
    out << line;
    for (std::size_t q = 0; q < result.percentiles.size(); ++q) {
      std::snprintf(line, sizeof line, " %7s", result.active[q][l] ? "active" : "-");
      out << line;
    }
    out << "\n";
  }
  std::snprintf(line, sizeof line, "%zu repetitions\n", result.reference_medians.size());
  out << line;
  return result;
}

ReplicationOutcome run_replication(const ScenarioDefinition& def, const ReplicationSettings& settings,
                                   std::uint64_t master, std::size_t rep) {
  ReplicationOutcome o;
  o.dataset = gen_dataset(def, replication_seed(master, rep));
  const FieldObservations data(o.dataset.design, o.dataset.design.matrix(), o.dataset.y);
  PriorSpec prior = settings.config.prior;
  std::vector<double> fixed;
  std::optional<std::vector<double>> cache;
  if (settings.calibrate) {
    prior.theta_bounds.assign(o.dataset.model_theta.size(), Bounds{0.0, 1.0});
  } else {
    prior.theta_bounds.clear();
    fixed = o.dataset.model_theta;
    cache = fixed;
  }
  auto mean = std::make_shared<const DirectModelMean>(scenario_model(def), data.design.matrix(), cache);
  SamplerConfig sc = settings.config.sampler;
  sc.seed = derive_seed(master, rep, StreamTag::kChain);
  const Chain chain = run_full_sampler(data, mean, prior, settings.config.kernel, sc, fixed);
  o.rho_draws = chain.rho_matrix();
  o.mh_acceptance = chain.mh_acceptance;
  o.pips = screen_chain(chain, screening_options(settings.config));
  if (settings.with_rdvs) {
    RdvsConfig rc;
    rc.repetitions = settings.rdvs_repetitions;
    rc.percentiles = settings.rdvs_percentiles;
    rc.sampler = settings.config.sampler;
    rc.master_seed = derive_seed(master, rep, StreamTag::kFictitious);
    o.rdvs = rdvs_run(data, mean, prior, settings.config.kernel, rc, fixed);
  }
  return o;
}

std::vector<ReplicationOutcome> run_replications(const ScenarioDefinition& def,
                                                 const ReplicationSettings& settings,
                                                 std::uint64_t master, std::size_t reps) {
  std::vector<ReplicationOutcome> outcomes(reps);
  std::exception_ptr failure;
  std::size_t failed_rep = reps;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t r = 0; r < reps; ++r) {
    try {
      outcomes[r] = run_replication(def, settings, master, r);
    } catch (...) {
#pragma omp critical(replication_failure)
      {
        if (r < failed_rep) {
          failed_rep = r;
          failure = std::current_exception();
        }
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return outcomes;
}

std::vector<DetectionRow> detection_table(const std::vector<ReplicationOutcome>& outcomes,
                                          const std::vector<double>& thresholds) {
  std::vector<DetectionRow> rows;
  if (outcomes.empty()) return rows;
  const std::size_t p = outcomes.front().pips.p;
  const double reps = static_cast<double>(outcomes.size());
  if (outcomes.front().rdvs) {
    const auto& percentiles = outcomes.front().rdvs->percentiles;
    for (std::size_t q = 0; q < percentiles.size(); ++q) {
      DetectionRow row{"RDVS", percent_label(percentiles[q]), std::vector<double>(p, 0.0)};
      for (const auto& o : outcomes) {
        for (std::size_t l = 0; l < p; ++l) row.proportions[l] += o.rdvs->active[q][l] ? 1.0 : 0.0;
      }
      for (double& v : row.proportions) v /= reps;
      rows.push_back(std::move(row));
    }
  }
  for (double th : thresholds) {
    DetectionRow row{"PIPS", threshold_label(th), std::vector<double>(p, 0.0)};
    for (const auto& o : outcomes) {
      const auto active = classify(o.pips.inclusion_probs, th);
      for (std::size_t l = 0; l < p; ++l) row.proportions[l] += active[l] ? 1.0 : 0.0;
    }
    for (double& v : row.proportions) v /= reps;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_detection_table(const std::vector<DetectionRow>& rows, std::size_t p) {
  std::ostringstream out;
  char cell[64];
  std::snprintf(cell, sizeof cell, "%-6s %-7s", "", "");
  out << cell;
  for (std::size_t l = 0; l < p; ++l) {
    std::snprintf(cell, sizeof cell, " %6s", ("x" + std::to_string(l + 1)).c_str());
    out << cell;
  }
  out << "\n";
  for (const auto& row : rows) {
    std::snprintf(cell, sizeof cell, "%-6s %-7s", row.method.c_str(), row.setting.c_str());
    out << cell;
    for (double v : row.proportions) {
      std::snprintf(cell, sizeof cell, " %6.2f", v);
      out << cell;
    }
    out << "\n";
  }
  return out.str();
}

namespace {

std::string detection_csv(const std::vector<DetectionRow>& rows, std::size_t p) {
  std::string out = "method,setting";
  for (std::size_t l = 1; l <= p; ++l) out += ",x_" + std::to_string(l);
  out += "\n";
  for (const auto& row : rows) {
    out += row.method + "," + row.setting;
    for (double v : row.proportions) out += "," + io::format_double(v);
    out += "\n";
  }
  return out;
}

std::string pips_long_csv(const std::vector<ReplicationOutcome>& outcomes) {
  std::string out = "replication,input,pip\n";
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    const auto& pips = outcomes[r].pips.inclusion_probs;
    for (std::size_t l = 0; l < pips.size(); ++l) {
      out += std::to_string(r + 1) + ",x_" + std::to_string(l + 1) + "," + io::format_double(pips[l]) + "\n";
    }
  }
  return out;
}

std::string rdvs_long_csv(const std::vector<ReplicationOutcome>& outcomes) {
  std::string out = "replication,input,median_rho\n";
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    if (!outcomes[r].rdvs) continue;
    const auto& med = outcomes[r].rdvs->input_medians;
    for (std::size_t l = 0; l < med.size(); ++l) {
      out += std::to_string(r + 1) + ",x_" + std::to_string(l + 1) + "," + io::format_double(med[l]) + "\n";
    }
    for (double ref : outcomes[r].rdvs->reference_medians) {
      out += std::to_string(r + 1) + ",reference," + io::format_double(ref) + "\n";
    }
  }
  return out;
}

}  // namespace

void cmd_bench(const BenchOptions& options, std::ostream& out) {
  options.config.validate();
  if (options.reps == 0) throw ConfigError("bench: --reps must be at least 1");
  for (double th : options.thresholds) {
    if (!(th > 0.0 && th < 1.0)) throw ConfigError("bench: thresholds must lie in (0, 1)");
  }
  const std::string dir = join(options.out_dir.empty() ? default_out_dir() : options.out_dir, options.suite);
  AnalysisConfig effective = options.config;
  effective.seed = options.seed;
  io::write_text(join(dir, "config.ini"), config_to_ini(effective));

  ReplicationSettings settings;
  settings.config = options.config;
  settings.rdvs_repetitions = options.config.rdvs_repetitions;
  settings.rdvs_percentiles = options.config.rdvs_percentiles;

  if (options.suite == "table1" || options.suite == "table2") {
    const ScenarioDefinition def = scenario_by_id("s41");
    settings.calibrate = options.suite == "table2";
    settings.with_rdvs = options.with_rdvs;
    const auto outcomes = run_replications(def, settings, options.seed, options.reps);
    const auto rows = detection_table(outcomes, options.thresholds);
    io::write_text(join(dir, "proportions.csv"), detection_csv(rows, def.p));
    io::write_text(join(dir, "pips_long.csv"), pips_long_csv(outcomes));
    if (options.with_rdvs) io::write_text(join(dir, "rdvs_long.csv"), rdvs_long_csv(outcomes));
    out << (settings.calibrate ? "theta calibrated" : "theta fixed at its true value") << ", " << options.reps
        << " replications\n"
        << format_detection_table(rows, def.p);
    return;
  }
  if (options.suite == "scenarios42") {
    std::string summary = "scenario,theta,input,median_pip\n";
    for (const char* id : {"s42-12", "s42-13", "s42-14"}) {
      const ScenarioDefinition def = scenario_by_id(id);
      for (bool calibrate : {false, true}) {
        settings.calibrate = calibrate;
        settings.with_rdvs = false;
        const auto outcomes = run_replications(def, settings, options.seed, options.reps);
        const std::string mode = calibrate ? "calibrated" : "fixed";
        io::write_text(join(dir, std::string(id) + "_" + mode + "_pips.csv"), pips_long_csv(outcomes));
        out << id << " (" << mode << "): median PIP";
        for (std::size_t l = 0; l < def.p; ++l) {
          std::vector<double> v;
          for (const auto& o : outcomes) v.push_back(o.pips.inclusion_probs[l]);
          const double med = stats::median(v);
          summary += std::string(id) + "," + mode + ",x_" + std::to_string(l + 1) + "," + io::format_double(med) + "\n";
          char cell[32];
          std::snprintf(cell, sizeof cell, " x%zu=%.3f", l + 1, med);
          out << cell;
        }
        out << "\n";
      }
    }
    io::write_text(join(dir, "medians.csv"), summary);
    return;
  }
  throw ConfigError("bench: unknown suite '" + options.suite + "' (expected table1, table2 or scenarios42)");
}

void cmd_report(const std::string& path, std::ostream& out) {
  const std::string text = io::read_text(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  const std::string kind = j.is_object() ? j.value("kind", "") : "";
  char line[160];
  if (kind == "pips-screening") {
    const ScreeningResult r = io::screening_from_json(text);
    std::vector<std::size_t> order(r.p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return r.inclusion_probs[a] > r.inclusion_probs[b]; });
    out << "input     pip      active\n";
    for (std::size_t l : order) {
      std::snprintf(line, sizeof line, "x_%-6zu %7.4f   %s\n", l + 1, r.inclusion_probs[l], r.active[l] ? "yes" : "no");
      out << line;
    }
    std::vector<std::size_t> models(r.model_posteriors.size());
    std::iota(models.begin(), models.end(), 0);
    std::stable_sort(models.begin(), models.end(),
                     [&](std::size_t a, std::size_t b) { return r.model_posteriors[a] > r.model_posteriors[b]; });
    out << "top models (bit l = input l+1 active):\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, models.size()); ++i) {
      const std::size_t g = models[i];
      std::snprintf(line, sizeof line, "  %-10s posterior %.4f  log B %.3f (se %.3f)\n",
                    ModelIndex(static_cast<std::uint32_t>(g)).hex().c_str(), r.model_posteriors[g],
                    r.log_bayes_factors[g], r.mc_se[g]);
      out << line;
    }
    if (r.low_ess_models > 0) out << r.low_ess_models << " models have a low importance-sampling ESS\n";
    return;
  }
  if (kind == "pips-rdvs") {
    const RdvsResult r = io::rdvs_from_json(text);
    const auto names = j.at("inputs").get<std::vector<std::string>>();
    for (std::size_t l = 0; l < r.input_medians.size(); ++l) {
      std::snprintf(line, sizeof line, "%-10s median rho %.4f", names[l].c_str(), r.input_medians[l]);
      out << line;
      for (std::size_t q = 0; q < r.percentiles.size(); ++q) {
        out << "  " << percent_label(r.percentiles[q]) << ":" << (r.active[q][l] ? "active" : "-");
      }
      out << "\n";
    }
    return;
  }
  throw IoError(path + ": not a screening or RDVS result");
}

}  // namespace pips::cli
