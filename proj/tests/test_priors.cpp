#include <cmath>
#include <limits>
#include <random>

#include <boost/math/distributions/inverse_gamma.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"
#include "pips/errors.hpp"
#include "pips/priors.hpp"

using namespace pips;

TEST_CASE("spike_log_density values") {
  CHECK(spike_log_density(1.0, 100.0) == doctest::Approx(std::log(100.0)).epsilon(1e-15));
  CHECK(spike_log_density(0.37, 1.0) == 0.0);
  const long double exact = std::log(100.0L * std::pow(0.99L, 99.0L));
  CHECK(spike_log_density(0.99, 100.0) == doctest::Approx(static_cast<double>(exact)).epsilon(1e-13));
  CHECK(std::exp(spike_log_density(0.99, 100.0)) == doctest::Approx(36.97).epsilon(1e-3));
  CHECK_THROWS_AS(spike_log_density(0.0, 100.0), ConfigError);
  CHECK_THROWS_AS(spike_log_density(1.01, 100.0), ConfigError);
  CHECK_THROWS_AS(spike_log_density(0.5, 0.5), ConfigError);
}

TEST_CASE("spike density integrates to one") {
  boost::math::quadrature::tanh_sinh<double> integrator;
  for (double alpha : {1.0, 50.0, 100.0, 200.0}) {
    const double total = integrator.integrate([&](double r) { return std::exp(spike_log_density(r, alpha)); }, 0.0, 1.0);
    CHECK(std::abs(total - 1.0) < 1e-8);
  }
}

TEST_CASE("spike and slab mixture is proper for either indicator") {
  boost::math::quadrature::tanh_sinh<double> integrator;
  // gamma = 1: uniform slab; gamma = 0: Beta(alpha, 1) spike.
  const double slab = integrator.integrate([](double) { return 1.0; }, 0.0, 1.0);
  const double spike = integrator.integrate([](double r) { return std::exp(spike_log_density(r, 100.0)); }, 0.0, 1.0);
  CHECK(slab == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spike == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("inverse gamma against an independent density") {
  for (const auto& [shape, rate] : std::vector<std::pair<double, double>>{{3.0, 1.0}, {4.0, 0.02}, {0.5, 7.0}}) {
    const boost::math::inverse_gamma_distribution<double> ref(shape, rate);
    for (double x : {0.001, 0.01, 0.2, 1.0, 5.0}) {
      if (boost::math::pdf(ref, x) < 1e-300) continue;  // underflows in the reference
      CHECK(InverseGamma{shape, rate}.log_pdf(x) == doctest::Approx(std::log(boost::math::pdf(ref, x))).epsilon(1e-12));
    }
    // The median splits the mass of our own density in half.
    const InverseGamma ig{shape, rate};
    const double med = ig.median();
    const double below = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double x) { return std::exp(ig.log_pdf(x)); }, 0.0, med, 15, 1e-12);
    CHECK(below == doctest::Approx(0.5).epsilon(1e-8));
  }
}

TEST_CASE("log_prior_eta") {
  PriorSpec spec;
  spec.theta_bounds = {{0.0, 1.0}, {-2.0, 2.0}};
  // Inverse-gamma modes: rate / (shape + 1).
  const double s2 = 1.0 / 4.0, s02 = 0.02 / 5.0;
  const std::vector<double> theta{0.5, 0.0};
  const boost::math::inverse_gamma_distribution<double> a(3.0, 1.0), b(4.0, 0.02);
  const double expected = std::log(boost::math::pdf(a, s2)) + std::log(boost::math::pdf(b, s02)) + 0.0 - std::log(4.0);
  CHECK(log_prior_eta(theta, s2, s02, spec) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(log_prior_eta(std::vector<double>{1.5, 0.0}, s2, s02, spec) == -std::numeric_limits<double>::infinity());
  CHECK(log_prior_eta(theta, -1.0, s02, spec) == -std::numeric_limits<double>::infinity());
  CHECK(log_prior_eta(theta, s2, 0.0, spec) == -std::numeric_limits<double>::infinity());

  PriorSpec unit;
  unit.theta_bounds = {{0.0, 1.0}};
  PriorSpec none;
  CHECK(log_prior_eta(std::vector<double>{0.3}, 1.0, 1.0, unit) == doctest::Approx(log_prior_eta({}, 1.0, 1.0, none)));
}

TEST_CASE("prior specification validation") {
  PriorSpec p;
  p.theta_bounds = {{0.0, std::numeric_limits<double>::infinity()}};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.theta_bounds = {{1.0, 1.0}};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.theta_bounds = {};
  p.sigma2.shape = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.sigma2.shape = 3.0;
  p.sigma02.rate = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);

  SpikeConfig s;
  CHECK(s.expand(3) == std::vector<double>{100.0, 100.0, 100.0});
  s.per_input = {50.0, 200.0};
  CHECK_THROWS_AS(s.validate(3), ConfigError);
  CHECK(s.alpha_for(1) == 200.0);
  s.alpha = 0.5;
  s.per_input.clear();
  CHECK_THROWS_AS(s.validate(2), ConfigError);
}

TEST_CASE("model space prior") {
  const ModelSpacePrior c = ModelSpacePrior::constant(3);
  CHECK(c.is_constant());
  CHECK(c.log_prior(0b101) == doctest::Approx(3.0 * std::log(0.5)));
  const ModelSpacePrior t{{0.2, 0.9}};
  CHECK_FALSE(t.is_constant());
  CHECK(t.log_prior(0b10) == doctest::Approx(std::log(0.8) + std::log(0.9)));
  CHECK_THROWS_AS((ModelSpacePrior{{1.0, 0.5}}.validate(2)), ConfigError);
  CHECK_THROWS_AS(ModelSpacePrior{{0.5}}.validate(2), ConfigError);
}

TEST_CASE("parameter transform") {
  CHECK(logit(0.5) == 0.0);
  CHECK(logistic(logit(0.5)) == 0.5);
  CHECK(log_logistic(-800.0) == doctest::Approx(-800.0));
  CHECK(std::isfinite(log_logistic(800.0)));

  const ParameterTransform one(1, {});
  CHECK(one.dim() == 3);
  CHECK(one.log_jacobian(Eigen::VectorXd::Zero(3)) == doctest::Approx(std::log(0.25)).epsilon(1e-15));
  Parameters unit;
  unit.rho = {0.5};
  unit.sigma2 = 1.0;
  unit.sigma02 = 1.0;
  const auto z = one.to_unconstrained(unit);
  CHECK(z.u.isZero(0.0));

  const ParameterTransform tr(4, {{0.0, 1.0}, {-3.0, 5.0}});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 1000; ++rep) {
    Parameters p;
    for (int l = 0; l < 4; ++l) p.rho.push_back(0.001 + 0.998 * u(rng));
    p.sigma2 = std::exp(6.0 * u(rng) - 3.0);
    p.sigma02 = std::exp(6.0 * u(rng) - 3.0);
    p.theta = {0.001 + 0.998 * u(rng), -3.0 + 8.0 * (0.001 + 0.998 * u(rng))};
    const auto fwd = tr.to_unconstrained(p);
    const Parameters back = tr.from_unconstrained(fwd.u);
    for (int l = 0; l < 4; ++l) CHECK(std::abs(back.rho[l] - p.rho[l]) < 1e-12);
    CHECK(std::abs(back.sigma2 - p.sigma2) < 1e-12 * std::max(1.0, p.sigma2));
    CHECK(std::abs(back.sigma02 - p.sigma02) < 1e-12 * std::max(1.0, p.sigma02));
    CHECK(std::abs(back.theta[0] - p.theta[0]) < 1e-12);
    CHECK(std::abs(back.theta[1] - p.theta[1]) < 1e-12);
    CHECK(fwd.log_jacobian == doctest::Approx(tr.log_jacobian(fwd.u)).epsilon(1e-12));
  }

  // Log-Jacobian against central differences of the (diagonal) map.
  Eigen::VectorXd u0(8);
  u0 << 0.3, -1.0, 2.0, 0.0, 0.5, -0.7, 1.2, -2.0;
  const auto flat = [&](const Eigen::VectorXd& v) {
    const Parameters p = tr.from_unconstrained(v);
    Eigen::VectorXd out(8);
    out << p.rho[0], p.rho[1], p.rho[2], p.rho[3], p.sigma2, p.sigma02, p.theta[0], p.theta[1];
    return out;
  };
  double logdet = 0.0;
  for (int c = 0; c < 8; ++c) {
    Eigen::VectorXd a = u0, b = u0;
    a(c) += 1e-6;
    b(c) -= 1e-6;
    logdet += std::log(std::abs((flat(a)(c) - flat(b)(c)) / 2e-6));
  }
  CHECK(tr.log_jacobian(u0) == doctest::Approx(logdet).epsilon(1e-7));

  Parameters outside;
  outside.rho = {1.0, 0.5, 0.5, 0.5};
  outside.theta = {0.5, 0.0};
  CHECK_THROWS_AS(tr.to_unconstrained(outside), ConfigError);
  Eigen::VectorXd bad = u0;
  bad(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(tr.from_unconstrained(bad), ConfigError);
}
