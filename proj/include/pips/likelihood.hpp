#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pips/kernel.hpp"

namespace pips {

// Black-box computer model f(x, theta). Providers declare whether evaluate()
// may be called concurrently; single-threaded models are evaluated serially.
class ComputerModel {
 public:
  virtual ~ComputerModel() = default;
  virtual double evaluate(std::span<const double> x, std::span<const double> theta) const = 0;
  virtual bool thread_safe() const { return true; }
  virtual std::string name() const { return "model"; }
};

// Field data: the kernel sees the scaled design, the computer model sees the
// inputs on their original scale. Both have one row per observation.
struct FieldObservations {
  Design design;
  Eigen::MatrixXd model_inputs;
  Eigen::VectorXd y;

  FieldObservations() = default;
  FieldObservations(Design d, Eigen::VectorXd obs);
  FieldObservations(Design d, Eigen::MatrixXd inputs, Eigen::VectorXd obs);

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return design.cols(); }
};

// Log of the n-variate normal density via a Cholesky factor (jitter policy
// applies). Throws NumericError if the factorization fails.
double mvn_logpdf(const Eigen::VectorXd& y, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

// f(x_i, theta) for every row of `inputs`.
Eigen::VectorXd evaluate_model(const ComputerModel& model, const Eigen::MatrixXd& inputs,
                               std::span<const double> theta);

// The field-data mean for a given theta, plus any covariance term that
// depends on theta (the emulator variance, for slow models).
class FieldMean {
 public:
  virtual ~FieldMean() = default;
  virtual Eigen::VectorXd mean(std::span<const double> theta) const = 0;
  virtual bool has_extra_covariance() const { return false; }
  virtual Eigen::MatrixXd extra_covariance(std::span<const double> theta) const;
  // Both at once; providers with shared work override this.
  virtual std::pair<Eigen::VectorXd, Eigen::MatrixXd> mean_and_extra(std::span<const double> theta) const;
};

// f(x_i, theta) from a fast computer model. When `cache_theta` is given the
// mean is evaluated once and reused for that theta.
class DirectModelMean : public FieldMean {
 public:
  DirectModelMean(std::shared_ptr<const ComputerModel> model, Eigen::MatrixXd inputs,
                  std::optional<std::vector<double>> cache_theta = std::nullopt);
  Eigen::VectorXd mean(std::span<const double> theta) const override;

 private:
  std::shared_ptr<const ComputerModel> model_;
  Eigen::MatrixXd inputs_;
  std::optional<std::vector<double>> cached_theta_;
  Eigen::VectorXd cached_mean_;
};

// A mean that does not depend on theta: a stored column of model output, or zero.
class FixedMean : public FieldMean {
 public:
  explicit FixedMean(Eigen::VectorXd values) : values_(std::move(values)) {}
  Eigen::VectorXd mean(std::span<const double>) const override { return values_; }

 private:
  Eigen::VectorXd values_;
};

// (inner - shift) / scale; any extra covariance is divided by scale^2. Matches
// a response that was centered and scaled the same way.
class AffineMean : public FieldMean {
 public:
  AffineMean(std::shared_ptr<const FieldMean> inner, double shift, double scale);
  Eigen::VectorXd mean(std::span<const double> theta) const override;
  bool has_extra_covariance() const override { return inner_->has_extra_covariance(); }
  Eigen::MatrixXd extra_covariance(std::span<const double> theta) const override;
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> mean_and_extra(std::span<const double> theta) const override;

 private:
  std::shared_ptr<const FieldMean> inner_;
  double shift_;
  double scale_;
};

double field_log_likelihood(const FieldObservations& data, std::span<const double> theta,
                            const RhoVector& rho, double sigma2, double sigma02,
                            const ComputerModel& model, const KernelConfig& kernel);

}  // namespace pips
