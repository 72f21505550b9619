#include <benchmark/benchmark.h>

#include <vector>

#include "nis/vmfnm.hpp"

namespace {

nis::VmfnmParams two_lobes(std::size_t d) {
  nis::VmfnmParams p;
  for (int k = 0; k < 2; ++k) {
    nis::VmfnComponent c;
    c.pi = k == 0 ? 0.3 : 0.7;
    c.m = 2.0;
    c.omega = 16.0;
    c.mu.assign(d, 0.0);
    c.mu[static_cast<std::size_t>(k)] = 1.0;
    c.kappa = 40.0;
    p.components.push_back(c);
  }
  return p;
}

void BM_SampleMixture(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const nis::VmfnmParams p = two_lobes(d);
  nis::RngStream rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(nis::sample_mixture(p, 250, rng));
  state.SetItemsProcessed(state.iterations() * 250);
}
BENCHMARK(BM_SampleMixture)->Arg(2)->Arg(100)->Arg(1000);

void BM_MixtureLogDensity(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const nis::VmfnmParams p = two_lobes(d);
  nis::RngStream rng(4);
  const auto pts = nis::sample_mixture(p, 256, rng);
  const nis::MixtureDensity density(p);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(density.log_density(pts[i++ & 255].point));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_MixtureLogDensity)->Arg(2)->Arg(100)->Arg(1000);

void BM_EmFit(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const nis::VmfnmParams truth = two_lobes(d);
  nis::RngStream rng(5);
  const auto s = nis::sample_mixture(truth, n, rng);
  std::vector<nis::PolarPoint> pts;
  std::vector<std::size_t> labels;
  for (const auto& lp : s) {
    pts.push_back(lp.point);
    labels.push_back(lp.component);
  }
  const auto init = nis::PosteriorMatrix::one_hot(labels, 2);
  for (auto _ : state) benchmark::DoNotOptimize(nis::em_fit(pts, init));
}
BENCHMARK(BM_EmFit)->Args({2, 750})->Args({2, 5000})->Args({100, 3000})->Unit(benchmark::kMillisecond);

}  // namespace
