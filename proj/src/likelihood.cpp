#include "pips/likelihood.hpp"

#include <cmath>
#include <algorithm>
#include <numbers>
#include <vector>

#include "pips/errors.hpp"
#include "pips/linalg.hpp"

namespace pips {

FieldObservations::FieldObservations(Design d, Eigen::VectorXd obs)
    : FieldObservations(d, d.matrix(), std::move(obs)) {}

FieldObservations::FieldObservations(Design d, Eigen::MatrixXd inputs, Eigen::VectorXd obs)
    : design(std::move(d)), model_inputs(std::move(inputs)), y(std::move(obs)) {
  if (design.rows() != y.size() || model_inputs.rows() != y.size()) {
    throw ConfigError("field observations: y length must equal the number of design rows");
  }
}

double mvn_logpdf(const Eigen::VectorXd& y, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  const Eigen::Index n = y.size();
  if (mean.size() != n || cov.rows() != n || cov.cols() != n) {
    throw ConfigError("mvn_logpdf: dimension mismatch");
  }
  const Cholesky chol = factorize_with_jitter(cov);
  const Eigen::VectorXd z = chol.half_solve(y - mean);
  return -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + chol.log_det() +
                 z.squaredNorm());
}

Eigen::VectorXd evaluate_model(const ComputerModel& model, const Eigen::MatrixXd& inputs,
                               std::span<const double> theta) {
  const Eigen::Index n = inputs.rows();
  const Eigen::Index p = inputs.cols();
  // Row-major copy so each row is a contiguous span.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = inputs;
  Eigen::VectorXd out(n);
  const bool parallel = model.thread_safe() && n >= 256;
#pragma omp parallel for schedule(static) if (parallel)
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i) = model.evaluate(std::span<const double>(rows.data() + i * p, p), theta);
  }
  return out;
}

Eigen::MatrixXd FieldMean::extra_covariance(std::span<const double>) const {
  return Eigen::MatrixXd();
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> FieldMean::mean_and_extra(std::span<const double> theta) const {
  return {mean(theta), extra_covariance(theta)};
}

DirectModelMean::DirectModelMean(std::shared_ptr<const ComputerModel> model, Eigen::MatrixXd inputs,
                                 std::optional<std::vector<double>> cache_theta)
    : model_(std::move(model)), inputs_(std::move(inputs)), cached_theta_(std::move(cache_theta)) {
  if (!model_) throw ConfigError("DirectModelMean: null computer model");
  if (cached_theta_) cached_mean_ = evaluate_model(*model_, inputs_, *cached_theta_);
}

Eigen::VectorXd DirectModelMean::mean(std::span<const double> theta) const {
  if (cached_theta_ && std::equal(theta.begin(), theta.end(), cached_theta_->begin(),
                                  cached_theta_->end())) {
    return cached_mean_;
  }
  return evaluate_model(*model_, inputs_, theta);
}

double field_log_likelihood(const FieldObservations& data, std::span<const double> theta,
                            const RhoVector& rho, double sigma2, double sigma02,
                            const ComputerModel& model, const KernelConfig& kernel) {
  const Eigen::VectorXd mean = evaluate_model(model, data.model_inputs, theta);
  const Eigen::MatrixXd r = corr_matrix(data.design, rho, kernel.a);
  return mvn_logpdf(data.y, mean, assemble_covariance(r, sigma2, sigma02));
}

AffineMean::AffineMean(std::shared_ptr<const FieldMean> inner, double shift, double scale)
    : inner_(std::move(inner)), shift_(shift), scale_(scale) {
  if (!inner_) throw ConfigError("AffineMean: null inner mean");
  if (!(scale_ > 0.0) || !std::isfinite(scale_) || !std::isfinite(shift_)) {
    throw ConfigError("AffineMean: scale must be positive and finite");
  }
}

Eigen::VectorXd AffineMean::mean(std::span<const double> theta) const {
  return (inner_->mean(theta).array() - shift_) / scale_;
}

Eigen::MatrixXd AffineMean::extra_covariance(std::span<const double> theta) const {
  return inner_->extra_covariance(theta) / (scale_ * scale_);
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> AffineMean::mean_and_extra(std::span<const double> theta) const {
  auto [m, c] = inner_->mean_and_extra(theta);
  return {(m.array() - shift_) / scale_, c / (scale_ * scale_)};
}

}  // namespace pips
