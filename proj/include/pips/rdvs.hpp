#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pips/kernel.hpp"
#include "pips/likelihood.hpp"
#include "pips/mcmc.hpp"
#include "pips/priors.hpp"
#include "pips/rng.hpp"

namespace pips {

struct RdvsConfig {
  std::size_t repetitions = 100;  // T
  std::vector<double> percentiles{0.05, 0.10, 0.15};
  SamplerConfig sampler;          // its seed is ignored; per-run seeds derive from master_seed
  std::uint64_t master_seed = 0;
  // Completed repetitions are written here (CSV) if a repetition fails.
  std::string partial_results_path;

  void validate() const;
};

struct RdvsResult {
  std::vector<double> reference_medians;   // posterior median of rho_new, one per repetition
  Eigen::MatrixXd run_medians;             // T x p posterior medians of the real inputs
  std::vector<double> input_medians;       // median over repetitions of run_medians
  std::vector<double> percentiles;
  std::vector<double> thresholds;          // reference quantile per percentile
  std::vector<std::vector<bool>> active;   // [percentile][input]
};

// Appends a column of i.i.d. Uniform(0, 1) draws.
Design augment_design(const Design& x, Rng& rng);

// Input l is active at percentile q when fewer than a fraction q of the
// reference medians are <= its representative median, i.e. when the median
// lies strictly below the inverse-ECDF quantile ref_(ceil(qT)). At q = 0
// nothing is active.
RdvsResult rdvs_classify(std::vector<double> reference_medians, Eigen::MatrixXd run_medians,
                         const std::vector<double>& percentiles);

// T independent runs of the full-model sampler, each with a fresh fictitious
// input. Repetition t uses make_stream(master, t, kFictitious) for the new
// column and derive_seed(master, t, kChain) for its chain.
RdvsResult rdvs_run(const FieldObservations& data, std::shared_ptr<const FieldMean> mean,
                    const PriorSpec& prior, const KernelConfig& kernel, const RdvsConfig& config,
                    std::vector<double> fixed_theta = {});

}  // namespace pips
