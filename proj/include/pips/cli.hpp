#pragma once

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pips/config.hpp"
#include "pips/io.hpp"
#include "pips/likelihood.hpp"
#include "pips/mcmc.hpp"
#include "pips/rdvs.hpp"
#include "pips/scenarios.hpp"
#include "pips/screening.hpp"

namespace pips::cli {

inline constexpr const char* kOutDirEnv = "PIPS_OUT_DIR";

// $PIPS_OUT_DIR if set, else "pips-out".
std::string default_out_dir();

// 2 config, 3 numeric, 4 I/O, 1 anything else.
int exit_code(const std::exception& e);

struct SimulateOptions {
  std::string scenario;
  std::size_t reps = 1;
  std::uint64_t seed = 1;
  std::string out_dir;
};

// Writes <scenario>_rep<NNN>.csv and .json per replication; returns the CSV paths.
std::vector<std::string> cmd_simulate(const SimulateOptions& options);

// Field data ready for the sampler, with everything needed to undo the
// preprocessing.
struct PreparedAnalysis {
  FieldObservations data;
  std::shared_ptr<const FieldMean> mean;
  PriorSpec prior;
  std::vector<double> fixed_theta;
  std::vector<std::string> input_names;
  std::size_t k = 0;
  std::vector<double> input_lower;  // per-column scaling x' = (x - lower) / span
  std::vector<double> input_span;
  double y_center = 0.0;  // y' = (y - center) / scale
  double y_scale = 1.0;
  AnalysisConfig config;  // with the scenario id and theta file resolved
};

PreparedAnalysis prepare_analysis(const io::FieldTable& table, const AnalysisConfig& config,
                                  const std::optional<io::DatasetMeta>& meta);

struct ScreenOptions {
  std::string data_path;
  AnalysisConfig config;
  std::string out_dir;
};

// Runs the full-model sampler once and screens every input. Writes
// chain.csv, screening.json, pips.csv, pips_long.csv, metadata.json and
// config.ini to out_dir and prints the PIP table.
ScreeningResult cmd_screen_pips(const ScreenOptions& options, std::ostream& out);

// Writes rdvs_reference.csv, rdvs.json, metadata.json and config.ini.
RdvsResult cmd_screen_rdvs(const ScreenOptions& options, std::ostream& out);

// One simulated replication screened by PIPS and, optionally, RDVS.
struct ReplicationOutcome {
  Dataset dataset;
  Eigen::MatrixXd rho_draws;  // M x p, kept for re-screening with other spike settings
  ScreeningResult pips;
  std::optional<RdvsResult> rdvs;
  double mh_acceptance = 0.0;
};

struct ReplicationSettings {
  AnalysisConfig config;  // sampler, priors, kernel, spike, threshold
  bool calibrate = false;
  bool with_rdvs = false;
  std::size_t rdvs_repetitions = 100;
  std::vector<double> rdvs_percentiles{0.05, 0.10, 0.15};
};

// Dataset seed replication_seed(master, rep); chain seed derive_seed(master,
// rep, kChain); RDVS master derive_seed(master, rep, kFictitious). Data are
// used as simulated (no scaling or normalization).
ReplicationOutcome run_replication(const ScenarioDefinition& def, const ReplicationSettings& settings,
                                   std::uint64_t master, std::size_t rep);

// Replications 0..reps-1, in parallel; the first failure is rethrown.
std::vector<ReplicationOutcome> run_replications(const ScenarioDefinition& def,
                                                 const ReplicationSettings& settings,
                                                 std::uint64_t master, std::size_t reps);

struct DetectionRow {
  std::string method;   // "RDVS" or "PIPS"
  std::string setting;  // "q5%", "th0.5", ...
  std::vector<double> proportions;
};

// Rows for RDVS at each percentile (if present) then PIPS at each threshold.
std::vector<DetectionRow> detection_table(const std::vector<ReplicationOutcome>& outcomes,
                                          const std::vector<double>& thresholds);

std::string format_detection_table(const std::vector<DetectionRow>& rows, std::size_t p);

struct BenchOptions {
  std::string suite;  // table1, table2 or scenarios42
  std::size_t reps = 20;
  std::uint64_t seed = 1;
  std::string out_dir;
  AnalysisConfig config;
  bool with_rdvs = true;
  std::vector<double> thresholds{0.1, 0.5, 0.9};
};

void cmd_bench(const BenchOptions& options, std::ostream& out);

// Human-readable rendering of a screening.json or rdvs.json file.
void cmd_report(const std::string& path, std::ostream& out);

}  // namespace pips::cli
