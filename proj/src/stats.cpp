#include "pips/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pips/errors.hpp"

namespace pips::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw ConfigError("mean of empty sequence");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double median(std::span<const double> x) {
  if (x.empty()) throw ConfigError("median of empty sequence");
  std::vector<double> v(x.begin(), x.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& draws) {
  if (draws.rows() < 2) throw ConfigError("sample covariance needs at least two draws");
  const Eigen::RowVectorXd mu = draws.colwise().mean();
  const Eigen::MatrixXd centred = draws.rowwise() - mu;
  return (centred.transpose() * centred) / static_cast<double>(draws.rows() - 1);
}

double batch_means_se(std::span<const double> x, std::size_t batches) {
  const std::size_t n = x.size();
  if (batches == 0) batches = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  if (batches < 2 || n < 2 * batches) throw ConfigError("batch_means_se: series too short");
  const std::size_t size = n / batches;
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    means[b] = mean(x.subspan(b * size, size));
  }
  const double grand = mean(means);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double var_batch = ss / static_cast<double>(batches - 1);
  return std::sqrt(var_batch / static_cast<double>(batches));
}

double effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  const double mu = mean(x);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mu) * (v - mu);
  c0 /= static_cast<double>(n);
  if (c0 <= 0.0) return static_cast<double>(n);

  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mu) * (x[i + lag] - mu);
    return s / static_cast<double>(n);
  };
  // Sum of consecutive-pair autocorrelations, kept positive and monotone.
  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  const std::size_t max_pairs = std::min<std::size_t>(n / 2, 2000);
  for (std::size_t k = 0; k < max_pairs && 2 * k + 1 < n; ++k) {
    double pair = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(n) + 10.0));
  return static_cast<double>(n) / tau;
}

double ecdf(std::span<const double> sorted_ref, double value) {
  if (sorted_ref.empty()) throw ConfigError("ecdf of empty reference");
  const auto it = std::upper_bound(sorted_ref.begin(), sorted_ref.end(), value);
  return static_cast<double>(it - sorted_ref.begin()) / static_cast<double>(sorted_ref.size());
}

LogWeightSummary summarize_log_weights(std::span<const double> log_w) {
  if (log_w.empty()) throw ConfigError("summarize_log_weights: empty weights");
  const double m = *std::max_element(log_w.begin(), log_w.end());
  const double count = static_cast<double>(log_w.size());
  LogWeightSummary out;
  if (!std::isfinite(m)) {
    out.log_mean = m;
    out.kish_ess = 0.0;
    out.log_se = std::numeric_limits<double>::infinity();
    return out;
  }
  double s1 = 0.0;
  double s2 = 0.0;
  for (double lw : log_w) {
    const double w = std::exp(lw - m);
    s1 += w;
    s2 += w * w;
  }
  out.log_mean = m + std::log(s1 / count);
  out.kish_ess = s1 * s1 / s2;
  // Var(w)/mean(w)^2 = M * s2 / s1^2 - 1; SE(log mean) = sqrt(that / M).
  const double rel_var = std::max(0.0, count * s2 / (s1 * s1) - 1.0);
  out.log_se = std::sqrt(rel_var / count);
  return out;
}

}  // namespace pips::stats
