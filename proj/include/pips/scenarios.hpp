#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pips/kernel.hpp"
#include "pips/likelihood.hpp"
#include "pips/rng.hpp"

namespace pips {

// Latin hypercube: column l is a random permutation of one uniform draw per
// stratum [(i-1)/n, i/n).
Design lhd(std::size_t n, std::size_t p, Rng& rng);

// sum over dims[j] of (|4 x_dims[j] - 2| + theta_j) / (1 + theta_j). `dims`
// are 0-based input indices; theta_j pairs with dims[j].
double model_f(std::span<const double> x, std::span<const double> theta,
               std::span<const std::size_t> dims);

// sin(2 pi x1 x5) + x2^3 + (1 - x6)^3.
double bias_delta(std::span<const double> x);

// Reality for the five-input validation scenarios. `structure` picks the
// terms (1: x1,x2,x3; 2: x1,x3; 3: x1,x2,x3,x4; 4: x1,x2,x5), each term using
// the theta of its own input. `x1_squared` substitutes x1 -> x1^2.
double reality_zeta(int structure, bool x1_squared, std::span<const double> x,
                    std::span<const double> theta);

// The four single cases: 1 = x1 mis-modelled, 2 = x2 absent from reality,
// 3 = x4 forgotten in the model, 4 = x5 in reality where the model has x3.
double scenario_zeta(int case_id, std::span<const double> x, std::span<const double> theta);

// Case 1 combined with case 2, 3 or 4.
double composite_zeta(int second_case, std::span<const double> x, std::span<const double> theta);

enum class InputDistribution { kLatinHypercube, kUniformCorrelated };
enum class CorrelationMethod { kClamp, kCopula };

struct CorrelationSpec {
  CorrelationMethod method = CorrelationMethod::kClamp;
  std::size_t source = 2;  // x3
  std::size_t target = 4;  // x5
  double tau = 0.05;       // clamp(x_source + tau z, 0, 1)
  double copula_rho = 0.9; // Gaussian-copula correlation
};

struct ScenarioDefinition {
  std::string id;
  std::size_t p = 0;
  std::size_t n = 0;
  std::vector<double> true_theta;            // theta used by the reality
  std::vector<std::size_t> model_dims;       // inputs of the assumed model f
  std::function<double(std::span<const double>, std::span<const double>)> reality;
  double noise_sd = 0.05;
  InputDistribution inputs = InputDistribution::kLatinHypercube;
  CorrelationSpec correlation;
  std::vector<std::size_t> truth;            // 0-based inputs active in the discrepancy

  // Theta of the assumed model at the true values (one per model dim).
  std::vector<double> model_theta() const;
};

std::vector<std::string> scenario_ids();
ScenarioDefinition scenario_by_id(const std::string& id);

// The assumed computer model f of a scenario.
class ScenarioModel : public ComputerModel {
 public:
  explicit ScenarioModel(std::vector<std::size_t> dims) : dims_(std::move(dims)) {}
  double evaluate(std::span<const double> x, std::span<const double> theta) const override;
  std::string name() const override { return "additive-abs"; }
  const std::vector<std::size_t>& dims() const { return dims_; }

 private:
  std::vector<std::size_t> dims_;
};

std::shared_ptr<const ComputerModel> scenario_model(const ScenarioDefinition& def);

struct Dataset {
  std::string scenario_id;
  std::uint64_t seed = 0;
  Design design;
  Eigen::VectorXd y;
  std::vector<std::size_t> truth;
  std::vector<double> true_theta;
  std::vector<double> model_theta;
};

// Draws the inputs, evaluates the reality and adds N(0, noise_sd^2) noise.
// The RNG is make_stream(seed, 0, StreamTag::kDataset).
Dataset gen_dataset(const ScenarioDefinition& def, std::uint64_t seed);

// Seed of replication `rep` under a master seed.
std::uint64_t replication_seed(std::uint64_t master, std::size_t rep);

}  // namespace pips
