#include <benchmark/benchmark.h>

#include <random>

#include "robsvd/robsvd.hpp"

using namespace robsvd;

namespace {

Matrix noisy_low_rank(std::size_t m, std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix a(m, p), b(n, p), noise(m, n);
  for (double& v : a.data()) v = nd(gen);
  for (double& v : b.data()) v = nd(gen);
  for (double& v : noise.data()) v = 0.1 * nd(gen);
  Matrix x = multiply_transposed(a, b) + noise;
  x(0, 0) += 20.0;
  return x;
}

void BM_Calibrate(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(calibrate(CalibrationTarget::efficacy(0.9), WeightPower::Four));
  }
}
BENCHMARK(BM_Calibrate);

void BM_LocationScale(benchmark::State& state) {
  auto xs = gaussian_quantile_sample(static_cast<std::size_t>(state.range(0)));
  xs.push_back(50.0);
  WeightSpec spec = calibrate(CalibrationTarget::k3(1.0), WeightPower::Four);
  for (auto _ : state) benchmark::DoNotOptimize(estimate(xs, spec));
}
BENCHMARK(BM_LocationScale)->Arg(100)->Arg(900);

void BM_RobustGls(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  RegressionProblem prob;
  prob.D = Matrix(n, 3);
  for (double& v : prob.D.data()) v = nd(gen);
  for (std::size_t i = 0; i < n; ++i) prob.y.push_back(prob.D(i, 0) - prob.D(i, 2) + 0.2 * nd(gen));
  prob.y[0] += 30.0;
  WeightSpec spec = calibrate(CalibrationTarget::k3(2.0), WeightPower::Four);
  for (auto _ : state) benchmark::DoNotOptimize(robust_gls(prob, spec));
}
BENCHMARK(BM_RobustGls)->Arg(50)->Arg(500);

void BM_OrdinarySvd(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  Matrix x = noisy_low_rank(m, m / 2, 2, 5);
  TsvdConfig cfg;
  cfg.rank = 2;
  cfg.spec = calibrate(CalibrationTarget::k3(1.5), WeightPower::Four);
  for (auto _ : state) benchmark::DoNotOptimize(total_svd(x, cfg));
}
BENCHMARK(BM_OrdinarySvd)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_TotalSvdSmall(benchmark::State& state) {
  Matrix x = Matrix::from_rows({{1, 2, 3}, {2, 4, 6.5}, {3, 6.2, 9}, {4, 7.9, 12}, {5, 10, 30}});
  TsvdConfig cfg;
  cfg.total = true;
  cfg.spec = state.range(0) != 0 ? calibrate(CalibrationTarget::k3(1.0), WeightPower::Four)
                                 : WeightSpec::least_squares();
  for (auto _ : state) benchmark::DoNotOptimize(total_svd(x, cfg));
}
BENCHMARK(BM_TotalSvdSmall)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
