#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pips::stats {

double mean(std::span<const double> x);
double median(std::span<const double> x);

// Unbiased sample covariance of the rows of `draws`.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& draws);

// Monte-Carlo standard error of the mean of a correlated series using
// non-overlapping batch means (batch count defaults to floor(sqrt(n))).
double batch_means_se(std::span<const double> x, std::size_t batches = 0);

// Effective sample size from the autocorrelation function, truncated with
// Geyer's initial monotone positive sequence.
double effective_sample_size(std::span<const double> x);

// Fraction of `sorted_ref` that is <= value.
double ecdf(std::span<const double> sorted_ref, double value);

// Moments of importance-style weights given on the log scale, with the
// maximum shifted out. All quantities are computed in one pass.
struct LogWeightSummary {
  double log_mean = 0.0;  // log((1/M) sum w)
  double kish_ess = 0.0;  // (sum w)^2 / sum w^2
  double log_se = 0.0;    // delta-method SE of log_mean assuming independent draws
};
LogWeightSummary summarize_log_weights(std::span<const double> log_w);

}  // namespace pips::stats
