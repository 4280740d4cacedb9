#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pips/kernel.hpp"
#include "pips/mcmc.hpp"
#include "pips/priors.hpp"

namespace pips {

inline constexpr int kConfigSchemaVersion = 1;

// Where the computer-model output at the field inputs comes from.
enum class ModelSource {
  kScenario,  // the assumed model of a built-in scenario
  kColumn,    // an `f` column of the data file (theta cannot be calibrated)
  kZero,      // no computer model: y = delta + noise
  kEmulator,  // GaSP emulator fitted to a design of model runs
};

struct AnalysisConfig {
  int schema_version = kConfigSchemaVersion;
  std::uint64_t seed = 1;
  KernelConfig kernel;
  SpikeConfig spike;
  PriorSpec prior;  // theta_bounds empty: [0, 1] for every theta
  SamplerConfig sampler;
  std::vector<double> tau;  // model-space prior; empty means constant
  double threshold = 0.5;
  bool pairwise = false;

  bool calibrate = true;
  bool emulator = false;
  ModelSource model = ModelSource::kScenario;
  std::string scenario;         // for kScenario; empty: taken from the dataset sidecar
  std::string emulator_design;  // CSV of model runs, when emulator is on
  std::size_t emulator_starts = 8;
  std::string theta_file;       // fixed theta when calibrate is off
  bool scale_inputs = true;
  bool normalize_output = true;

  std::size_t rdvs_repetitions = 100;
  std::vector<double> rdvs_percentiles{0.05, 0.10, 0.15};

  // Checks everything that does not depend on the data.
  void validate() const;
  // Checks against the data dimensions: p inputs and k calibration parameters.
  void validate_for(std::size_t p, std::size_t k) const;
  // Sampler settings with the seed filled in.
  SamplerConfig sampler_config() const;
};

// INI text: top-level schema_version and seed, then sections [kernel],
// [spike], [prior], [sampler], [model_space], [screening], [analysis], [rdvs].
// Lists are comma separated. Unknown keys are rejected.
AnalysisConfig parse_config(const std::string& text);
AnalysisConfig load_config(const std::string& path);
// Every field written out, defaults included.
std::string config_to_ini(const AnalysisConfig& config);

std::string model_source_name(ModelSource source);
ModelSource parse_model_source(const std::string& name);

}  // namespace pips
