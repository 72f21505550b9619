#include <benchmark/benchmark.h>

#include "nis/special_functions.hpp"

namespace {

void BM_LogBesselI(benchmark::State& state) {
  const double order = static_cast<double>(state.range(0)) / 2.0 - 1.0;
  const double kappa = static_cast<double>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(nis::log_bessel_i(order, kappa));
}
BENCHMARK(BM_LogBesselI)
    ->ArgsProduct({{2, 10, 100, 1000}, {1, 50, 1000, 100000}})
    ->ArgNames({"d", "kappa"});

void BM_InverseGammaOfNormal(benchmark::State& state) {
  double z = -4.0;
  for (auto _ : state) {
    const double p = nis::normal_cdf(z);
    benchmark::DoNotOptimize(p < 0.5 ? nis::inverse_regularized_gamma_p(6.0, p)
                                     : nis::inverse_regularized_gamma_q(6.0, 1.0 - p));
    z = z > 4.0 ? -4.0 : z + 0.37;
  }
}
BENCHMARK(BM_InverseGammaOfNormal);

void BM_NormalQuantile(benchmark::State& state) {
  double p = 1e-6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nis::normal_quantile(p));
    p = p > 0.5 ? 1e-6 : p * 1.7;
  }
}
BENCHMARK(BM_NormalQuantile);

}  // namespace
