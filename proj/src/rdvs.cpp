#include "pips/rdvs.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>

#include "pips/errors.hpp"
#include "pips/stats.hpp"

namespace pips {

void RdvsConfig::validate() const {
  if (repetitions < 2) throw ConfigError("rdvs: need at least 2 repetitions");
  if (percentiles.empty()) throw ConfigError("rdvs: at least one percentile is required");
  for (double q : percentiles) {
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("rdvs: percentiles must lie in [0, 1]");
  }
}

Design augment_design(const Design& x, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::VectorXd column(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) column(i) = unif(rng);
  return x.with_column(column);
}

RdvsResult rdvs_classify(std::vector<double> reference_medians, Eigen::MatrixXd run_medians,
                         const std::vector<double>& percentiles) {
  if (reference_medians.empty()) throw ConfigError("rdvs: empty reference distribution");
  if (run_medians.rows() != static_cast<Eigen::Index>(reference_medians.size())) {
    throw ConfigError("rdvs: one row of input medians per repetition is required");
  }
  RdvsResult res;
  res.percentiles = percentiles;
  const std::size_t t = reference_medians.size();
  const std::size_t p = static_cast<std::size_t>(run_medians.cols());

  std::vector<double> sorted = reference_medians;
  std::sort(sorted.begin(), sorted.end());

  res.input_medians.resize(p);
  std::vector<double> column(t);
  for (std::size_t l = 0; l < p; ++l) {
    for (std::size_t r = 0; r < t; ++r) column[r] = run_medians(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(l));
    res.input_medians[l] = stats::median(column);
  }

  for (double q : percentiles) {
    const std::size_t k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(t) - 1e-12));
    res.thresholds.push_back(k == 0 ? 0.0 : sorted[std::min(k, t) - 1]);
    std::vector<bool> flags(p);
    for (std::size_t l = 0; l < p; ++l) flags[l] = stats::ecdf(sorted, res.input_medians[l]) < q;
    res.active.push_back(std::move(flags));
  }
  res.reference_medians = std::move(reference_medians);
  res.run_medians = std::move(run_medians);
  return res;
}

RdvsResult rdvs_run(const FieldObservations& data, std::shared_ptr<const FieldMean> mean,
                    const PriorSpec& prior, const KernelConfig& kernel, const RdvsConfig& config,
                    std::vector<double> fixed_theta) {
  config.validate();
  const std::size_t t_count = config.repetitions;
  const Eigen::Index p = data.p();
  std::vector<double> reference(t_count, 0.0);
  Eigen::MatrixXd run_medians(static_cast<Eigen::Index>(t_count), p);
  std::vector<char> done(t_count, 0);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t t = 0; t < t_count; ++t) {
    try {
      Rng rng = make_stream(config.master_seed, t, StreamTag::kFictitious);
      FieldObservations augmented(augment_design(data.design, rng), data.model_inputs, data.y);
      SamplerConfig sc = config.sampler;
      sc.seed = derive_seed(config.master_seed, t, StreamTag::kChain);
      const Chain chain = run_full_sampler(augmented, mean, prior, kernel, sc, fixed_theta);
      const std::vector<double> med = chain.rho_medians();
      reference[t] = med.back();
      for (Eigen::Index l = 0; l < p; ++l) run_medians(static_cast<Eigen::Index>(t), l) = med[static_cast<std::size_t>(l)];
      done[t] = 1;
    } catch (...) {
#pragma omp critical(rdvs_failure)
      if (!failure) failure = std::current_exception();
    }
  }

  if (failure) {
    if (!config.partial_results_path.empty()) {
      std::ofstream out(config.partial_results_path);
      out << "repetition,rho_new_median";
      for (Eigen::Index l = 0; l < p; ++l) out << ",rho_" << (l + 1) << "_median";
      out << '\n' << std::setprecision(17);
      for (std::size_t t = 0; t < t_count; ++t) {
        if (!done[t]) continue;
        out << t << ',' << reference[t];
        for (Eigen::Index l = 0; l < p; ++l) out << ',' << run_medians(static_cast<Eigen::Index>(t), l);
        out << '\n';
      }
    }
    std::rethrow_exception(failure);
  }
  return rdvs_classify(std::move(reference), std::move(run_medians), config.percentiles);
}

}  // namespace pips
