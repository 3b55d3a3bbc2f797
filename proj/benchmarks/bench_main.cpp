#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "heterodyn/config_io.hpp"
#include "heterodyn/filter.hpp"
#include "heterodyn/gev.hpp"
#include "heterodyn/rng.hpp"
#include "heterodyn/simulate.hpp"
#include "heterodyn/transfer.hpp"

namespace {

using namespace heterodyn;

ModelConfig reference() {
  return ModelConfig(load_model_spec(std::string(HETERODYN_CONFIG_DIR) + "/reference.cfg"));
}

void BM_BuildUlam(benchmark::State& state) {
  const ModelConfig cfg = reference();
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_ulam(cfg, n));
}
BENCHMARK(BM_BuildUlam)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_StationaryDensity(benchmark::State& state) {
  const KernelMatrix L = build_ulam(reference(), static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(stationary_density(L));
}
BENCHMARK(BM_StationaryDensity)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_FilterUpdate(benchmark::State& state) {
  const ModelConfig cfg = reference();
  const KernelMatrix L = build_ulam(cfg, static_cast<std::size_t>(state.range(0)));
  const GridDensity w = stationary_density(L).leading_density;
  const Trajectory tr = simulate(cfg, 1000, Start::stationary(), {1, 0});
  FilterState s = start_filter(w, tr.z[0], cfg);
  std::size_t k = 1;
  for (auto _ : state) {
    s = update(s, tr.z[k], L, cfg);
    if (++k == tr.size()) {
      state.PauseTiming();
      s = start_filter(w, tr.z[0], cfg);
      k = 1;
      state.ResumeTiming();
    }
  }
}
// Coarser grids cannot resolve the 1e-3 wide observation band of the
// reference config and hit ZeroNormalizer.
BENCHMARK(BM_FilterUpdate)->Arg(1024)->Arg(2048)->Unit(benchmark::kMicrosecond);

void BM_Simulate(benchmark::State& state) {
  const ModelConfig cfg = reference();
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(cfg, n, Start::at(0.5), {++seed, 0}));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_GevFit(benchmark::State& state) {
  Rng rng({7, 0});
  std::vector<double> data(static_cast<std::size_t>(state.range(0)));
  for (double& y : data) y = gev_quantile(rng.uniform_open(), 0.1, 3.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(gev_fit(data));
}
BENCHMARK(BM_GevFit)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
