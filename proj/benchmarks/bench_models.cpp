#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "nis/performance_models.hpp"
#include "nis/polar.hpp"

namespace {

// Evaluates the model on a fixed pool of standard normal inputs.
void BM_Evaluate(benchmark::State& state, const std::string& name, std::size_t dim) {
  const nis::ModelPtr model = nis::make_model(name, dim);
  nis::RngStream rng(1);
  std::vector<nis::Vector> pool;
  for (int i = 0; i < 256; ++i) pool.push_back(nis::sample_std_normal(model->dim(), rng));
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model->evaluate(pool[i++ & 255]));
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_IsFailure(benchmark::State& state, const std::string& name) {
  const nis::ModelPtr model = nis::make_model(name);
  nis::RngStream rng(2);
  std::vector<nis::Vector> pool;
  for (int i = 0; i < 256; ++i) pool.push_back(nis::sample_std_normal(model->dim(), rng));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(model->is_failure(pool[i++ & 255]));
  state.SetItemsProcessed(state.iterations());
}

BENCHMARK_CAPTURE(BM_Evaluate, pwl, std::string("pwl"), 0);
BENCHMARK_CAPTURE(BM_Evaluate, pwl_d100, std::string("pwl"), 100);
BENCHMARK_CAPTURE(BM_Evaluate, meatball, std::string("meatball"), 0);
BENCHMARK_CAPTURE(BM_Evaluate, vehicle, std::string("vehicle"), 0);
BENCHMARK_CAPTURE(BM_Evaluate, tdof, std::string("tdof"), 0);
BENCHMARK_CAPTURE(BM_Evaluate, portfolio30, std::string("portfolio-30"), 0);
BENCHMARK_CAPTURE(BM_Evaluate, portfolio250, std::string("portfolio-250"), 0);
BENCHMARK_CAPTURE(BM_IsFailure, tdof, std::string("tdof"));

}  // namespace
