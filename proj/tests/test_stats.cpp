#include <cmath>
#include <random>

#include "doctest.h"
#include "pips/errors.hpp"
#include "pips/stats.hpp"

using namespace pips;

TEST_CASE("mean and median") {
  CHECK(stats::mean(std::vector<double>{1.0, 2.0, 6.0}) == 3.0);
  CHECK(stats::median(std::vector<double>{3.0, 1.0, 2.0}) == 2.0);
  CHECK(stats::median(std::vector<double>{4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK_THROWS_AS(stats::median(std::vector<double>{}), ConfigError);
}

TEST_CASE("sample covariance") {
  Eigen::MatrixXd two(2, 1);
  two << 1.0, 3.0;
  CHECK(stats::sample_covariance(two)(0, 0) == 2.0);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd d(10000, 3);
  for (Eigen::Index i = 0; i < d.size(); ++i) d.data()[i] = z(rng);
  const Eigen::MatrixXd c = stats::sample_covariance(d);
  CHECK((c - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("ecdf") {
  const std::vector<double> ref{0.1, 0.2, 0.2, 0.5};
  CHECK(stats::ecdf(ref, 0.05) == 0.0);
  CHECK(stats::ecdf(ref, 0.2) == 0.75);
  CHECK(stats::ecdf(ref, 0.9) == 1.0);
}

TEST_CASE("effective sample size and batch means on an AR(1) series") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0.0, 1.0);
  const double phi = 0.8;
  std::vector<double> x(200000);
  double v = 0.0;
  for (double& e : x) {
    v = phi * v + std::sqrt(1.0 - phi * phi) * z(rng);
    e = v;
  }
  // Integrated autocorrelation time of AR(1): (1 + phi) / (1 - phi) = 9.
  const double ess = stats::effective_sample_size(x);
  CHECK(ess == doctest::Approx(200000.0 / 9.0).epsilon(0.1));
  const double se = stats::batch_means_se(x);
  CHECK(se == doctest::Approx(std::sqrt(9.0 / 200000.0)).epsilon(0.2));
}

TEST_CASE("log weight summary") {
  const auto s = stats::summarize_log_weights(std::vector<double>{std::log(1.0), std::log(3.0)});
  CHECK(s.log_mean == doctest::Approx(std::log(2.0)));
  CHECK(s.kish_ess == doctest::Approx(16.0 / 10.0));
  const auto flat = stats::summarize_log_weights(std::vector<double>(10, -1000.0));
  CHECK(flat.log_mean == doctest::Approx(-1000.0));
  CHECK(flat.log_se == 0.0);
  CHECK(flat.kish_ess == doctest::Approx(10.0));
}
