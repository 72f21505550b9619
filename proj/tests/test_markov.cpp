#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "nis/markov.hpp"
#include "nis/performance_models.hpp"
#include "nis/rng.hpp"
#include "nis/special_functions.hpp"

using namespace nis;

namespace {

StationaryTarget half_line(double beta, int* calls = nullptr) {
  return StationaryTarget([beta, calls](std::span<const double> x) -> std::optional<double> {
    if (calls) ++*calls;
    if (x[0] >= beta) return x[0] - beta;
    return std::nullopt;
  });
}

}  // namespace

TEST(MmAcceptance, IdenticalStatesAlwaysAccepted) {
  for (double x : {-3.0, 0.0, 0.7, 12.0}) EXPECT_EQ(mm_acceptance(x, x), 1.0);
}

TEST(MmAcceptance, UnitStepFromOrigin) {
  EXPECT_NEAR(mm_acceptance(0.0, 1.0), std::exp(-0.5), 1e-16);
  EXPECT_NEAR(mm_acceptance(0.0, 1.0), 0.6065, 1e-4);
  EXPECT_EQ(mm_acceptance(1.0, 0.0), 1.0);
}

TEST(MmStep, RejectingTargetNeverMoves) {
  int calls = 0;
  const StationaryTarget never([&calls](std::span<const double>) -> std::optional<double> {
    ++calls;
    return std::nullopt;
  });
  RngStream rng(1);
  const ChainState seed{{0.3, -1.2, 2.0}, 0.5};
  const Chain chain = run_chain(seed, never, 500, 0.8, rng);
  ASSERT_EQ(chain.size(), 501u);
  for (const auto& s : chain) {
    EXPECT_EQ(s.x, seed.x);
    EXPECT_EQ(s.g, seed.g);
  }
  EXPECT_GT(calls, 0);
  EXPECT_LE(calls, 500);
}

TEST(RunChain, ZeroStepsKeepsOnlySeed) {
  RngStream rng(2);
  const Chain chain = run_chain({{1.5}, 0.5}, half_line(1.0), 0, 0.8, rng);
  ASSERT_EQ(chain.size(), 1u);
  EXPECT_EQ(chain[0].x[0], 1.5);
}

TEST(RunChain, ExtendAppendsExactlyRequestedStates) {
  RngStream rng(3);
  Chain chain = run_chain({{1.5}, 0.5}, half_line(1.0), 9, 0.8, rng);
  EXPECT_EQ(chain.size(), 10u);
  extend_chain(chain, half_line(1.0), 7, 0.8, rng);
  EXPECT_EQ(chain.size(), 17u);
  Chain empty;
  EXPECT_THROW(extend_chain(empty, half_line(1.0), 1, 0.8, rng), std::invalid_argument);
}

TEST(RunChain, TruncatedNormalMean) {
  RngStream rng(4);
  const Chain chain = run_chain({{1.0}, 0.0}, half_line(1.0), 100'000, 0.8, rng);
  double mean = 0.0;
  for (const auto& s : chain) mean += s.x[0];
  mean /= static_cast<double>(chain.size());
  const double want = std::exp(log_normal_pdf(1.0)) / normal_cdf(-1.0);
  EXPECT_NEAR(want, 1.5251, 1e-4);
  EXPECT_NEAR(mean / want, 1.0, 0.02);
}

TEST(RunChain, KolmogorovSmirnovAgainstTruncatedNormal) {
  RngStream rng(5);
  const std::size_t thin = 20;
  const std::size_t n = 100'000;
  const Chain chain = run_chain({{1.0}, 0.0}, half_line(1.0), n * thin, 0.8, rng);
  std::vector<double> xs;
  xs.reserve(n);
  for (std::size_t i = thin; i < chain.size(); i += thin) xs.push_back(chain[i].x[0]);
  ASSERT_EQ(xs.size(), n);
  std::sort(xs.begin(), xs.end());
  const double tail = normal_cdf(-1.0);
  double ks = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double cdf = (normal_cdf(xs[i]) - normal_cdf(1.0)) / tail;
    ks = std::max({ks, std::abs(cdf - static_cast<double>(i) / n),
                   std::abs(cdf - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(ks, 0.01);
}

TEST(RunChain, StatesSatisfyTargetAndCacheMatches) {
  CountedModel model(make_model("pwl"));
  const StationaryTarget target = failure_target(model);
  RngStream rng(6);
  const std::vector<double> seed{4.5, 0.0};
  const Chain chain = run_chain({seed, model.evaluate(seed)}, target, 2000, 0.8, rng);
  for (const auto& s : chain) {
    const double fresh = model.model().evaluate(s.x);
    EXPECT_GE(fresh, 0.0);
    EXPECT_EQ(s.g, fresh);
  }
}

TEST(RunChain, OneEvaluationPerMovedCandidate) {
  CountedModel model(make_model("halfspace", 10));
  const StationaryTarget target = failure_target(model);
  RngStream rng(7);
  std::vector<double> seed(10, 0.0);
  seed[0] = 3.5;
  const double g0 = model.model().evaluate(seed);
  const Chain chain = run_chain({seed, g0}, target, 1000, 0.8, rng);
  // With ten coordinates a step that leaves every coordinate in place is
  // vanishingly rare, so every step costs one evaluation.
  EXPECT_EQ(model.evaluations(), 1000u);
  EXPECT_EQ(chain.size(), 1001u);
}

TEST(RunChain, DeterministicForSeed) {
  RngStream a(8), b(8);
  const Chain x = run_chain({{1.2, 0.0}, 0.2}, half_line(1.0), 300, 0.8, a);
  const Chain y = run_chain({{1.2, 0.0}, 0.2}, half_line(1.0), 300, 0.8, b);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i].x, y[i].x);
}
