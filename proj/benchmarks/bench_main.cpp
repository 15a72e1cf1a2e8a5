#include <benchmark/benchmark.h>

#include "dbmk/contour.hpp"
#include "dbmk/correlation.hpp"
#include "dbmk/eynard_mehta.hpp"
#include "dbmk/kernels.hpp"
#include "dbmk/monte_carlo.hpp"
#include "dbmk/special_functions.hpp"

using namespace dbmk;

namespace {

kernels::KernelEvalConfig with(kernels::Representation r) {
  kernels::KernelEvalConfig c;
  c.representation = r;
  c.fallback_to_contour = false;
  return c;
}

void BM_HermiteFunctions(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    sf::HermiteFunctions h(n, 1.3);
    benchmark::DoNotOptimize(h.value(n));
  }
}
BENCHMARK(BM_HermiteFunctions)->Arg(10)->Arg(100)->Arg(1000);

void BM_KernelSeries(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto cfg = with(kernels::Representation::Series);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::kernel_dbm({n, 0.2, 0.3}, {n - 1, 0.7, -0.4}, cfg));
}
BENCHMARK(BM_KernelSeries)->Arg(2)->Arg(8)->Arg(32);

void BM_KernelContour(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  auto cfg = with(kernels::Representation::Contour);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::kernel_dbm({n, 0.2, 0.3}, {n - 1, 0.7, -0.4}, cfg));
}
BENCHMARK(BM_KernelContour)->Arg(2)->Arg(8)->Arg(32);

void BM_DoubleContour(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(contour::double_contour(n, n, 0.3, -0.2, 0.8).value);
}
BENCHMARK(BM_DoubleContour)->Arg(1)->Arg(4)->Arg(16);

void BM_BeadKernel(benchmark::State& state) {
  kernels::BeadParam a(0.5);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::kernel_bead(a, {1, 0.1, 0.4}, {0, 0.6, -0.3}));
}
BENCHMARK(BM_BeadKernel);

void BM_CorrelationDensity(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  auto kernel = corr::make_kernel(corr::Family::DBM);
  std::vector<kernels::SpaceTimePoint> pts;
  for (int i = 0; i < k; ++i) pts.push_back({k - i, 0.1 * i, 0.3 * i - 0.5});
  for (auto _ : state) benchmark::DoNotOptimize(corr::correlation_density({kernel, pts}).value);
}
BENCHMARK(BM_CorrelationDensity)->Arg(2)->Arg(4)->Arg(8);

void BM_GapProbability(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(corr::gap_probability(4, 0.0, -0.5, 0.5, 40));
}
BENCHMARK(BM_GapProbability);

void BM_EynardMehtaOracle(benchmark::State& state) {
  const int points = static_cast<int>(state.range(0));
  em::PathDescriptor path{{2, 2, 1}, {0.3, 0.8, 0.8}};
  auto grid = em::Grid::uniform(-5, 5, points);
  for (auto _ : state) {
    auto dk = em::discretized_minor_kernel(path, grid, -8.0, em::OracleFamily::OU);
    benchmark::DoNotOptimize(dk.rho1(0));
  }
}
BENCHMARK(BM_EynardMehtaOracle)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_SimulateDbm(benchmark::State& state) {
  mc::SimConfig cfg;
  cfg.n = static_cast<int>(state.range(0));
  cfg.times = {0.5, 1.0};
  cfg.paths = 1;
  long path = 0;
  for (auto _ : state) benchmark::DoNotOptimize(mc::simulate_path(mc::Process::DBM, cfg, path++));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SimulateDbm)->Arg(2)->Arg(8)->Arg(32);

void BM_SimulateWarren(benchmark::State& state) {
  mc::SimConfig cfg;
  cfg.n = static_cast<int>(state.range(0));
  cfg.times = {1.0};
  cfg.paths = 1;
  cfg.euler_step = 1e-3;
  long path = 0;
  for (auto _ : state) benchmark::DoNotOptimize(mc::simulate_path(mc::Process::Warren, cfg, path++));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SimulateWarren)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
