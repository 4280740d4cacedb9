#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "pips/errors.hpp"
#include "pips/rdvs.hpp"
#include "pips/scenarios.hpp"

using namespace pips;

namespace {

class CountingMean : public FieldMean {
 public:
  CountingMean(Eigen::VectorXd values, long limit) : values_(std::move(values)), limit_(limit) {}
  Eigen::VectorXd mean(std::span<const double>) const override {
    if (limit_ >= 0 && calls_.fetch_add(1) >= limit_) throw IoError("model crashed");
    if (limit_ < 0) calls_.fetch_add(1);
    return values_;
  }
  long calls() const { return calls_.load(); }

 private:
  Eigen::VectorXd values_;
  long limit_;
  mutable std::atomic<long> calls_{0};
};

SamplerConfig tiny_sampler() {
  SamplerConfig c;
  c.seed = 0;
  c.n_mwg = 100;
  c.n_mh = 300;
  return c;
}

}  // namespace

TEST_CASE("augment_design") {
  Rng rng = make_stream(1, 0, StreamTag::kTest);
  const Design x = lhd(10, 3, rng);
  Rng a = make_stream(5, 0, StreamTag::kFictitious);
  Rng b = make_stream(5, 0, StreamTag::kFictitious);
  Rng c = make_stream(5, 1, StreamTag::kFictitious);
  const Design xa = augment_design(x, a);
  const Design xb = augment_design(x, b);
  const Design xc = augment_design(x, c);
  CHECK(xa.cols() == 4);
  CHECK(xa.matrix().leftCols(3) == x.matrix());
  CHECK(xa.matrix() == xb.matrix());
  CHECK(xa.matrix().col(3) != xc.matrix().col(3));
}

TEST_CASE("classification rule") {
  // Ten reference medians 0.90, 0.91, ..., 0.99.
  std::vector<double> ref;
  for (int i = 0; i < 10; ++i) ref.push_back(0.90 + 0.01 * i);
  Eigen::MatrixXd runs(10, 3);
  for (int t = 0; t < 10; ++t) runs.row(t) << 0.5, 0.905, 0.995;
  const RdvsResult r = rdvs_classify(ref, runs, {0.0, 0.1, 0.15, 1.0});
  CHECK(r.active[0] == std::vector<bool>{false, false, false});
  CHECK(r.active[1] == std::vector<bool>{true, false, false});
  CHECK(r.active[2] == std::vector<bool>{true, true, false});
  CHECK(r.active[3] == std::vector<bool>{true, true, false});
  CHECK(r.thresholds[0] == 0.0);
  CHECK(r.thresholds[1] == doctest::Approx(0.90));
  CHECK(r.thresholds[2] == doctest::Approx(0.91));
  CHECK(r.input_medians == std::vector<double>{0.5, 0.905, 0.995});

  // At q = 1 a median equal to the largest reference value is not active.
  Eigen::MatrixXd at_max(10, 1);
  at_max.setConstant(0.99);
  CHECK_FALSE(rdvs_classify(ref, at_max, {1.0}).active[0][0]);
}

TEST_CASE("active sets grow with the percentile") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> ref(37);
  for (double& v : ref) v = 0.6 + 0.4 * u(rng);
  Eigen::MatrixXd runs(37, 6);
  for (Eigen::Index i = 0; i < runs.size(); ++i) runs.data()[i] = u(rng);
  std::vector<double> qs;
  for (int k = 0; k <= 20; ++k) qs.push_back(k / 20.0);
  const RdvsResult r = rdvs_classify(ref, runs, qs);
  for (std::size_t k = 1; k < qs.size(); ++k) {
    for (std::size_t l = 0; l < 6; ++l) {
      if (r.active[k - 1][l]) CHECK(r.active[k][l]);
    }
  }
}

TEST_CASE("rdvs_run is deterministic and writes partial results on failure") {
  const ScenarioDefinition def = scenario_by_id("s41");
  const Dataset ds = gen_dataset(def, 21);
  const FieldObservations data(ds.design, ds.y);
  const Eigen::VectorXd f = evaluate_model(*scenario_model(def), ds.design.matrix(), ds.model_theta);
  RdvsConfig cfg;
  cfg.repetitions = 2;
  cfg.sampler = tiny_sampler();
  cfg.master_seed = 77;
  auto counting = std::make_shared<CountingMean>(f, -1);
  const RdvsResult a = rdvs_run(data, counting, PriorSpec{}, KernelConfig{}, cfg);
  const RdvsResult b = rdvs_run(data, std::make_shared<FixedMean>(f), PriorSpec{}, KernelConfig{}, cfg);
  CHECK(a.reference_medians == b.reference_medians);
  CHECK(a.run_medians == b.run_medians);
  for (double m : a.reference_medians) CHECK((m > 0.0 && m <= 1.0));
  CHECK(a.run_medians.cols() == 8);

  const long per_rep = counting->calls() / 2;
  const std::string path = (std::filesystem::temp_directory_path() / "pips_rdvs_partial_test.csv").string();
  std::remove(path.c_str());
  cfg.repetitions = 3;
  cfg.partial_results_path = path;
  auto failing = std::make_shared<CountingMean>(f, per_rep + per_rep / 2);
  CHECK_THROWS_AS(rdvs_run(data, failing, PriorSpec{}, KernelConfig{}, cfg), IoError);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header, line;
  std::getline(in, header);
  CHECK(header.rfind("repetition,rho_new_median", 0) == 0);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows >= 1);
  CHECK(rows < 3);
}

TEST_CASE("rdvs configuration") {
  RdvsConfig c;
  c.repetitions = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.repetitions = 5;
  c.percentiles = {1.5};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
