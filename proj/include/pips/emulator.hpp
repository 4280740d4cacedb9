#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pips/kernel.hpp"
#include "pips/likelihood.hpp"
#include "pips/linalg.hpp"

namespace pips {

// Runs of the computer model: columns x_1..x_p then theta_1..theta_k.
struct EmulatorDesign {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd outputs;
  std::size_t p = 0;
  std::size_t k = 0;

  void validate() const;
};

struct EmulatorFitOptions {
  double a = 1.9;
  std::size_t starts = 8;
  std::uint64_t seed = 0;
  double min_range = 1e-3;  // bounds on each range parameter psi_j
  double max_range = 1e3;
  double variance_floor = 1e-10;
  std::size_t max_iterations = 200;
};

// Constant-mean GaSP conditioned on the design runs with plug-in parameters.
// Inputs are min/max scaled with the design's column ranges before the
// kernel exp(-sum_j |d_j|^a / psi_j) is applied.
class FittedEmulator {
 public:
  // Rebuilds the conditioned process from stored parameters (refactorizes).
  FittedEmulator(EmulatorDesign design, std::vector<double> ranges, double process_variance,
                 double mean, double a);

  std::size_t p() const { return design_.p; }
  std::size_t k() const { return design_.k; }
  double a() const { return a_; }
  const std::vector<double>& ranges() const { return ranges_; }
  double process_variance() const { return process_variance_; }
  double mean() const { return mean_; }
  const EmulatorDesign& design() const { return design_; }
  double log_marginal_likelihood() const { return log_marginal_; }

  // Conditional mean and conditional correlation (scale 1) at raw points.
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> predict(const Eigen::MatrixXd& points) const;

 private:
  Eigen::MatrixXd scale(const Eigen::MatrixXd& raw) const;

  EmulatorDesign design_;
  std::vector<double> ranges_;
  double process_variance_;
  double mean_;
  double a_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd span_;
  Eigen::MatrixXd scaled_design_;
  RhoVector rho_;
  Cholesky chol_;
  Eigen::VectorXd weights_;  // C^{-1} (f - mean)
  double log_marginal_ = 0.0;
};

// Maximizes the profile marginal likelihood over log ranges with multi-start
// BFGS. Reads only the design runs.
FittedEmulator fit_emulator(const EmulatorDesign& design, const EmulatorFitOptions& options);

// e(theta) and K at field inputs x_i paired with a common theta.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> emulator_mean_cov(const FittedEmulator& em,
                                                              const Eigen::MatrixXd& x,
                                                              std::span<const double> theta);

// log N(y | e(theta), sigma_f2 K + sigma2 R + sigma02 I).
double extended_log_likelihood(const FieldObservations& data, const FittedEmulator& em,
                               std::span<const double> theta, const RhoVector& rho, double sigma2,
                               double sigma02, double sigma_f2, const KernelConfig& kernel);

// Emulator mean with the emulator covariance sigma_f^2 K as an extra term;
// sigma_f^2 is the plug-in value from the fit.
class EmulatorMean : public FieldMean {
 public:
  EmulatorMean(std::shared_ptr<const FittedEmulator> em, Eigen::MatrixXd field_inputs,
               std::optional<std::vector<double>> cache_theta = std::nullopt);

  Eigen::VectorXd mean(std::span<const double> theta) const override;
  bool has_extra_covariance() const override { return true; }
  Eigen::MatrixXd extra_covariance(std::span<const double> theta) const override;
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> mean_and_extra(std::span<const double> theta) const override;

 private:
  std::shared_ptr<const FittedEmulator> em_;
  Eigen::MatrixXd inputs_;
  std::optional<std::vector<double>> cached_theta_;
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> cached_;
};

std::string emulator_to_json(const FittedEmulator& em);
FittedEmulator emulator_from_json(const std::string& text);

}  // namespace pips
