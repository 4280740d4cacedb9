// Timings of the parallel kernels against their serial reference versions.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <omp.h>

#include "pips/kernel.hpp"
#include "pips/rng.hpp"
#include "pips/scenarios.hpp"
#include "pips/screening.hpp"

namespace {

template <class F>
double seconds_per_call(F&& f, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

void bench_corr(std::size_t n, std::size_t p, int reps) {
  pips::Rng rng = pips::make_stream(11, n, pips::StreamTag::kTest);
  const pips::Design x = pips::lhd(n, p, rng);
  std::uniform_real_distribution<double> u(0.2, 0.99);
  std::vector<double> r(p);
  for (double& v : r) v = u(rng);
  const pips::RhoVector rho(r);
  const pips::PairwiseDistances dist(x, 1.9);

  Eigen::MatrixXd a, b, c;
  const double t_par = seconds_per_call([&] { a = pips::corr_matrix(x, rho, 1.9); }, reps);
  const double t_ser = seconds_per_call([&] { b = pips::corr_matrix_serial(x, rho, 1.9); }, reps);
  const double t_pair = seconds_per_call([&] { c = dist.correlation(rho); }, reps);
  std::printf("corr_matrix        n=%4zu p=%2zu  parallel %9.3f ms  serial %9.3f ms  pairwise %9.3f ms  "
              "max|diff| %.2e\n",
              n, p, 1e3 * t_par, 1e3 * t_ser, 1e3 * t_pair, (a - b).cwiseAbs().maxCoeff());
}

void bench_bayes(std::size_t m, std::size_t p, int reps) {
  pips::Rng rng = pips::make_stream(12, p, pips::StreamTag::kTest);
  std::uniform_real_distribution<double> u(0.9, 1.0);
  Eigen::MatrixXd draws(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < draws.size(); ++i) draws.data()[i] = u(rng);
  const std::vector<double> alpha(p, 100.0);
  const Eigen::MatrixXd w = pips::log_weight_matrix(draws, alpha);

  std::vector<pips::LogBayesFactor> fast, slow;
  const double t_par = seconds_per_call([&] { fast = pips::all_log_bayes_factors(w); }, reps);
  const double t_ser = seconds_per_call([&] { slow = pips::all_log_bayes_factors_serial(w); }, 1);
  double diff = 0.0;
  for (std::size_t g = 0; g < fast.size(); ++g) diff = std::max(diff, std::abs(fast[g].log_bf - slow[g].log_bf));
  std::printf("all_log_bayes      M=%6zu p=%2zu  blocked  %9.3f ms  serial %9.3f ms  max|diff| %.2e\n", m, p,
              1e3 * t_par, 1e3 * t_ser, diff);
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
  for (std::size_t n : {50, 100, 400}) bench_corr(n, 8, quick ? 2 : 20);
  bench_bayes(10000, 8, quick ? 1 : 5);
  bench_bayes(10000, quick ? 10 : 14, 1);
  return 0;
}
