#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "pips/emulator.hpp"
#include "pips/errors.hpp"
#include "pips/mcmc.hpp"
#include "pips/scenarios.hpp"
#include "pips/screening.hpp"

using namespace pips;

namespace {

EmulatorDesign sine_design(std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0, StreamTag::kTest);
  const Design x = lhd(n, 1, rng);
  EmulatorDesign d;
  d.p = 1;
  d.k = 0;
  d.inputs = x.matrix();
  d.outputs = (2.0 * std::numbers::pi * x.matrix().col(0).array()).sin();
  return d;
}

}  // namespace

TEST_CASE("design validation") {
  EmulatorDesign d = sine_design(5, 1);
  d.inputs.row(1) = d.inputs.row(0);
  CHECK_THROWS_AS(d.validate(), ConfigError);
  EmulatorDesign small = sine_design(2, 1);
  CHECK_THROWS_AS(small.validate(), ConfigError);
}

TEST_CASE("constant runs give a constant emulator at the variance floor") {
  EmulatorDesign d = sine_design(10, 2);
  d.outputs.setConstant(3.5);
  const FittedEmulator em = fit_emulator(d, EmulatorFitOptions{});
  CHECK(em.process_variance() == EmulatorFitOptions{}.variance_floor);
  Eigen::MatrixXd pts(3, 1);
  pts << 0.05, 0.5, 0.93;
  const auto [mean, cov] = em.predict(pts);
  for (int i = 0; i < 3; ++i) CHECK(mean(i) == doctest::Approx(3.5).epsilon(1e-10));
}

TEST_CASE("sine holdout, interpolation and reproducibility") {
  const EmulatorDesign d = sine_design(15, 3);
  EmulatorFitOptions opt;
  opt.seed = 4;
  const FittedEmulator em = fit_emulator(d, opt);
  const FittedEmulator again = fit_emulator(d, opt);
  CHECK(em.ranges() == again.ranges());
  CHECK(em.process_variance() == again.process_variance());
  CHECK(em.mean() == again.mean());

  Eigen::MatrixXd hold(200, 1);
  for (int i = 0; i < 200; ++i) hold(i, 0) = (i + 0.5) / 200.0;
  const Eigen::VectorXd truth = (2.0 * std::numbers::pi * hold.col(0).array()).sin();
  const Eigen::VectorXd pred = em.predict(hold).first;
  const double rmse = std::sqrt((pred - truth).squaredNorm() / 200.0);
  const double sd = std::sqrt((d.outputs.array() - d.outputs.mean()).square().sum() / 14.0);
  CHECK(rmse < sd);
  CHECK(rmse < 0.05);

  const auto [at_design, k] = em.predict(d.inputs);
  CHECK((at_design - d.outputs).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(k.diagonal().maxCoeff() <= 1e-8);

  Eigen::MatrixXd far(1, 1);
  far << 25.0;
  CHECK(em.predict(far).second(0, 0) == doctest::Approx(1.0).epsilon(1e-6));

  const Eigen::MatrixXd kk = em.predict(hold.topRows(30)).second;
  CHECK((kk - kk.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kk);
  CHECK(eig.eigenvalues().minCoeff() > -1e-8);
}

TEST_CASE("profile likelihood optimum beats the other starts") {
  const EmulatorDesign d = sine_design(12, 5);
  EmulatorFitOptions one;
  one.starts = 1;
  EmulatorFitOptions many;
  many.starts = 8;
  CHECK(fit_emulator(d, many).log_marginal_likelihood() >= fit_emulator(d, one).log_marginal_likelihood() - 1e-9);
}

TEST_CASE("JSON persistence refactorizes to the same predictions") {
  const EmulatorDesign d = sine_design(10, 6);
  const FittedEmulator em = fit_emulator(d, EmulatorFitOptions{});
  const FittedEmulator back = emulator_from_json(emulator_to_json(em));
  Eigen::MatrixXd pts(4, 1);
  pts << 0.1, 0.33, 0.6, 0.99;
  CHECK(back.predict(pts).first == em.predict(pts).first);
  CHECK(back.ranges() == em.ranges());
  CHECK_THROWS_AS(emulator_from_json("{\"kind\": \"other\"}"), IoError);
  CHECK_THROWS_AS(emulator_from_json("not json"), IoError);
}

TEST_CASE("extended likelihood") {
  const ScenarioDefinition def = scenario_by_id("s41");
  const Dataset ds = gen_dataset(def, 8);
  Rng rng = make_stream(9, 0, StreamTag::kTest);
  const Design dx = lhd(30, 12, rng);
  EmulatorDesign d;
  d.p = 8;
  d.k = 4;
  d.inputs = dx.matrix();
  d.outputs.resize(30);
  const std::vector<std::size_t> dims{0, 1, 2, 3};
  for (int i = 0; i < 30; ++i) {
    const Eigen::VectorXd row = d.inputs.row(i).transpose();
    d.outputs(i) = model_f(std::span<const double>(row.data(), 8), std::span<const double>(row.data() + 8, 4), dims);
  }
  const auto em = std::make_shared<const FittedEmulator>(fit_emulator(d, EmulatorFitOptions{}));
  const FieldObservations data(ds.design, ds.y);
  const RhoVector rho({0.3, 0.4, 0.9, 0.95, 0.5, 0.6, 0.97, 0.99});
  const auto [e, k] = emulator_mean_cov(*em, ds.design.matrix(), ds.model_theta);
  const Eigen::MatrixXd base = assemble_covariance(corr_matrix(ds.design, rho, 1.9), 0.8, 0.003);

  CHECK(extended_log_likelihood(data, *em, ds.model_theta, rho, 0.8, 0.003, 0.0, KernelConfig{}) ==
        doctest::Approx(oracle::dense_mvn_logpdf(ds.y, e, base)).epsilon(1e-9));
  const Eigen::MatrixXd three = base + 0.2 * k;
  CHECK(extended_log_likelihood(data, *em, ds.model_theta, rho, 0.8, 0.003, 0.2, KernelConfig{}) ==
        doctest::Approx(oracle::dense_mvn_logpdf(ds.y, e, three)).epsilon(1e-9));

  const EmulatorMean mean(em, ds.design.matrix());
  const auto [m2, extra] = mean.mean_and_extra(ds.model_theta);
  CHECK(m2 == e);
  CHECK((extra - em->process_variance() * k).cwiseAbs().maxCoeff() == 0.0);
}

namespace {

// PIPS on one 8-input dataset with the scenario model, then with an emulator
// fitted to `runs` evaluations of it. Theta stays fixed, so the runs vary it
// only in a small box around the fixed value.
std::pair<ScreeningResult, ScreeningResult> direct_and_emulated(std::size_t runs) {
  const ScenarioDefinition def = scenario_by_id("s41");
  const Dataset ds = gen_dataset(def, replication_seed(2024, 0));
  const FieldObservations data(ds.design, ds.y);
  const auto model = scenario_model(def);

  Rng rng = make_stream(10, runs, StreamTag::kTest);
  const Design dx = lhd(runs, 12, rng);
  EmulatorDesign d;
  d.p = 8;
  d.k = 4;
  d.inputs = dx.matrix();
  for (Eigen::Index j = 0; j < 4; ++j) {
    d.inputs.col(8 + j) = (ds.model_theta[static_cast<std::size_t>(j)] - 0.05 + 0.1 * dx.matrix().col(8 + j).array()).matrix();
  }
  d.outputs.resize(static_cast<Eigen::Index>(runs));
  for (Eigen::Index i = 0; i < d.outputs.size(); ++i) {
    const Eigen::VectorXd row = d.inputs.row(i).transpose();
    d.outputs(i) = model->evaluate(std::span<const double>(row.data(), 8), std::span<const double>(row.data() + 8, 4));
  }
  const auto em = std::make_shared<const FittedEmulator>(fit_emulator(d, EmulatorFitOptions{}));

  SamplerConfig sc;
  sc.seed = 31;
  const Chain direct = run_full_sampler(data, std::make_shared<DirectModelMean>(model, ds.design.matrix(), ds.model_theta),
                                        PriorSpec{}, KernelConfig{}, sc, ds.model_theta);
  const Chain emulated = run_full_sampler(data, std::make_shared<EmulatorMean>(em, ds.design.matrix(), ds.model_theta),
                                          PriorSpec{}, KernelConfig{}, sc, ds.model_theta);
  return {screen_chain(direct, ScreeningOptions{}), screen_chain(emulated, ScreeningOptions{})};
}

}  // namespace

TEST_CASE("emulated pipeline recovers the direct pipeline's active set") {
  const auto [direct, emulated] = direct_and_emulated(100);
  CHECK(direct.active == emulated.active);
}

// Registered as its own ctest entry.
TEST_CASE("emulated pipeline with 40 model runs" * doctest::test_suite("small-design")) {
  const auto [direct, emulated] = direct_and_emulated(40);
  for (std::size_t l = 0; l < 8; ++l) {
    INFO("x", l + 1, ": direct ", direct.inclusion_probs[l], ", emulated ", emulated.inclusion_probs[l]);
    CHECK(direct.active[l] == emulated.active[l]);
  }
}
