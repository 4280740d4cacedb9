#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "pips/cli.hpp"
#include "pips/config.hpp"
#include "pips/errors.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n_mwg;
  std::optional<std::size_t> n_mh;
  std::optional<double> alpha;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config_path, "Analysis configuration (INI)")->check(CLI::ExistingFile);
  app->add_option("--out", f.out_dir, "Output directory (default $PIPS_OUT_DIR or ./pips-out)");
  app->add_option("--seed", f.seed, "Master seed (overrides the config)");
  app->add_option("--mwg", f.n_mwg, "Metropolis-within-Gibbs sweeps");
  app->add_option("--mh", f.n_mh, "Joint Metropolis-Hastings iterations");
  app->add_option("--alpha", f.alpha, "Spike Beta(alpha, 1) parameter");
}

pips::AnalysisConfig resolve(const CommonFlags& f) {
  pips::AnalysisConfig c = f.config_path.empty() ? pips::AnalysisConfig{} : pips::load_config(f.config_path);
  if (f.seed) c.seed = *f.seed;
  if (f.n_mwg) c.sampler.n_mwg = *f.n_mwg;
  if (f.n_mh) c.sampler.n_mh = *f.n_mh;
  if (f.alpha) c.spike.alpha = *f.alpha;
  return c;
}

bool parse_switch(const std::string& s) {
  if (s == "on" || s == "true" || s == "yes") return true;
  if (s == "off" || s == "false" || s == "no") return false;
  throw pips::ConfigError("expected on or off, got '" + s + "'");
}

double as_fraction(double q) { return q > 1.0 ? q / 100.0 : q; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Screening of active inputs in the discrepancy of a computer model"};
  app.require_subcommand(1);
  int jobs = 0;
  bool quiet = false;
  app.add_option("--jobs,-j", jobs, "Worker threads for replications and repetitions (0: OpenMP default)")
      ->check(CLI::NonNegativeNumber);
  app.add_flag("--quiet,-q", quiet, "Suppress warnings");

  pips::cli::SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Generate scenario datasets");
  simulate->add_option("--scenario", sim.scenario, "Scenario id (s41, s42-1..4, s42-12, s42-13, s42-14)")->required();
  simulate->add_option("--reps", sim.reps, "Number of replications")->required();
  simulate->add_option("--seed", sim.seed, "Master seed")->required();
  simulate->add_option("--out", sim.out_dir, "Output directory");

  auto* screen = app.add_subcommand("screen", "Screen the discrepancy inputs of a dataset");
  screen->require_subcommand(1);
  std::string data_path, calibrate, theta_file, model, scenario, emulator_design;
  std::optional<double> threshold;
  std::optional<std::size_t> rdvs_t;
  std::vector<double> percentiles;
  CommonFlags pips_flags, rdvs_flags;
  auto add_screen_options = [&](CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--data", data_path, "Field data CSV (inputs, y, optional f)")->required()->check(CLI::ExistingFile);
    add_common(cmd, f);
    cmd->add_option("--calibrate", calibrate, "on: calibrate theta; off: fix it (see --theta)");
    cmd->add_option("--theta", theta_file, "JSON file with a \"theta\" array (a dataset sidecar also works)");
    cmd->add_option("--model", model, "scenario, column, zero or emulator");
    cmd->add_option("--scenario", scenario, "Scenario whose assumed model is used");
    cmd->add_option("--emulator-design", emulator_design, "CSV of model runs (x_*, theta_*, f)");
  };
  auto* screen_pips = screen->add_subcommand("pips", "Posterior inclusion probabilities");
  add_screen_options(screen_pips, pips_flags);
  screen_pips->add_option("--threshold", threshold, "Activeness threshold on the PIP");
  auto* screen_rdvs = screen->add_subcommand("rdvs", "Reference distribution variable selection");
  add_screen_options(screen_rdvs, rdvs_flags);
  screen_rdvs->add_option("--T", rdvs_t, "Repetitions with a fictitious input");
  screen_rdvs->add_option("--percentile", percentiles, "Percentile(s) of the reference distribution, as a fraction or in percent");

  pips::cli::BenchOptions bench_opts;
  CommonFlags bench_flags;
  bool no_rdvs = false;
  std::optional<std::size_t> bench_t;
  auto* bench = app.add_subcommand("bench", "Detection-proportion experiments over simulated replications");
  bench->add_option("--suite", bench_opts.suite, "table1, table2 or scenarios42")->required();
  bench->add_option("--reps", bench_opts.reps, "Replications");
  add_common(bench, bench_flags);
  bench->add_flag("--no-rdvs", no_rdvs, "Skip the RDVS baseline");
  bench->add_option("--T", bench_t, "RDVS repetitions per replication");

  std::string report_path;
  auto* report = app.add_subcommand("report", "Print a stored screening or RDVS result");
  report->add_option("file", report_path, "screening.json or rdvs.json")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (jobs > 0) omp_set_num_threads(jobs);
    pips::set_quiet(quiet);
    if (*simulate) {
      for (const auto& path : pips::cli::cmd_simulate(sim)) std::cout << path << "\n";
    } else if (*screen_pips || *screen_rdvs) {
      CommonFlags& flags = *screen_pips ? pips_flags : rdvs_flags;
      pips::cli::ScreenOptions so;
      so.data_path = data_path;
      so.out_dir = flags.out_dir;
      so.config = resolve(flags);
      if (!calibrate.empty()) so.config.calibrate = parse_switch(calibrate);
      if (!theta_file.empty()) so.config.theta_file = theta_file;
      if (!model.empty()) {
        so.config.model = pips::parse_model_source(model);
        so.config.emulator = so.config.model == pips::ModelSource::kEmulator;
      }
      if (!scenario.empty()) so.config.scenario = scenario;
      if (!emulator_design.empty()) so.config.emulator_design = emulator_design;
      if (threshold) so.config.threshold = *threshold;
      if (rdvs_t) so.config.rdvs_repetitions = *rdvs_t;
      if (!percentiles.empty()) {
        so.config.rdvs_percentiles.clear();
        for (double q : percentiles) so.config.rdvs_percentiles.push_back(as_fraction(q));
      }
      so.config.validate();
      if (*screen_pips) {
        pips::cli::cmd_screen_pips(so, std::cout);
      } else {
        pips::cli::cmd_screen_rdvs(so, std::cout);
      }
    } else if (*bench) {
      bench_opts.config = resolve(bench_flags);
      bench_opts.seed = bench_opts.config.seed;
      bench_opts.out_dir = bench_flags.out_dir;
      bench_opts.with_rdvs = !no_rdvs;
      if (bench_t) bench_opts.config.rdvs_repetitions = *bench_t;
      pips::cli::cmd_bench(bench_opts, std::cout);
    } else if (*report) {
      pips::cli::cmd_report(report_path, std::cout);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return pips::cli::exit_code(e);
  }
  return 0;
}
