#include <benchmark/benchmark.h>

#include "nis/markov.hpp"
#include "nis/nis.hpp"
#include "nis/performance_models.hpp"

namespace {

void BM_MmStep(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const nis::CountedModel model(nis::make_model("halfspace", d));
  const nis::StationaryTarget target = nis::failure_target(model);
  nis::Vector x(d, 0.0);
  x[0] = 3.5;
  nis::ChainState s{x, model.evaluate(x)};
  nis::RngStream rng(6);
  for (auto _ : state) {
    s = nis::mm_step(s, target, 0.8, rng);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MmStep)->Arg(2)->Arg(100)->Arg(1000);

void BM_NisRun(benchmark::State& state, const char* name, std::size_t dim) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const nis::CountedModel model(nis::make_model(name, dim));
    benchmark::DoNotOptimize(nis::nis_run(model, nis::NisConfig{}, nis::RngStream(seed++)));
  }
}
BENCHMARK_CAPTURE(BM_NisRun, pwl, "pwl", 0)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_NisRun, meatball, "meatball", 0)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_NisRun, pwl_d100, "pwl", 100)->Unit(benchmark::kMillisecond);

}  // namespace
