#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <vector>

#include "nis/nis.hpp"
#include "nis/performance_models.hpp"
#include "nis/special_functions.hpp"

using namespace nis;

namespace {

Vector unit(std::size_t d, std::size_t axis, double sign = 1.0) {
  Vector v(d, 0.0);
  v[axis] = sign;
  return v;
}

VmfnComponent component(double pi, double m, double omega, Vector mu, double kappa) {
  VmfnComponent c;
  c.pi = pi;
  c.m = m;
  c.omega = omega;
  c.mu = std::move(mu);
  c.kappa = kappa;
  return c;
}

std::vector<PolarPoint> points_of(const std::vector<LabeledPoint>& s) {
  std::vector<PolarPoint> out;
  for (const auto& lp : s) out.push_back(lp.point);
  return out;
}

StationaryTarget half_plane(double beta) {
  return StationaryTarget([beta](std::span<const double> x) -> std::optional<double> {
    if (x[0] >= beta) return x[0] - beta;
    return std::nullopt;
  });
}

}  // namespace

// --- budget ---------------------------------------------------------------------------

TEST(TotalBudget, Examples) {
  EXPECT_DOUBLE_EQ(total_budget(30.0, 1.0, 2), 750.0);
  EXPECT_DOUBLE_EQ(total_budget(30.0, 1.0, 100), 3000.0);
  EXPECT_DOUBLE_EQ(total_budget(30.0, 2.5, 25), 1875.0);
}

// --- chain updates ----------------------------------------------------------------------

TEST(UpdateChains, SingleChainGainsBudget) {
  ChainSet set;
  set.chains.push_back({{{3.5, 0.0}, 0.5}});
  set.alpha = {1.0};
  const auto added = update_chains(set, half_plane(3.0), 10.0, 0.8, RngStream(1));
  EXPECT_EQ(added, std::vector<std::size_t>{10});
  EXPECT_EQ(set.chains[0].size(), 11u);
}

TEST(UpdateChains, SmallShareGainsNothing) {
  ChainSet set;
  set.chains.push_back({{{3.5, 0.0}, 0.5}});
  set.chains.push_back({{{4.0, 1.0}, 1.0}});
  set.alpha = {0.95, 0.05};
  const auto added = update_chains(set, half_plane(3.0), 19.0, 0.8, RngStream(2));
  EXPECT_EQ(added[0], 18u);
  EXPECT_EQ(added[1], 0u);
  EXPECT_EQ(set.lengths(), (std::vector<std::size_t>{19, 1}));
  EXPECT_EQ(set.total_states(), 20u);
}

TEST(UpdateChains, AppendedStatesLieInFailureRegion) {
  ChainSet set;
  set.chains.push_back({{{3.5, 0.0}, 0.5}});
  set.chains.push_back({{{3.1, -2.0}, 0.1}});
  set.alpha = {0.5, 0.5};
  update_chains(set, half_plane(3.0), 2000.0, 0.8, RngStream(3));
  for (const auto& chain : set.chains)
    for (const auto& s : chain) EXPECT_GE(s.x[0], 3.0);
}

TEST(UpdateChains, MismatchedWeightsRejected) {
  ChainSet set;
  set.chains.push_back({{{3.5, 0.0}, 0.5}});
  EXPECT_THROW(update_chains(set, half_plane(3.0), 5.0, 0.8, RngStream(4)), std::invalid_argument);
}

// --- estimator ---------------------------------------------------------------------------

TEST(IsEstimate, ProposalEqualToInputWithEverythingFailing) {
  // d = 2 standard normal as a vMFNM: Nakagami(1, 2) radius, uniform direction.
  VmfnmParams p{{component(1.0, 1.0, 2.0, unit(2, 0), 0.0)}};
  const CountedModel always(std::make_shared<HalfSpaceModel>(2, -1e300));
  RngStream rng(5);
  const auto s = sample_mixture(p, 500, rng);
  const auto w = importance_weights(s, p, always);
  for (double v : w) EXPECT_NEAR(v, 1.0, 1e-12);
  EXPECT_NEAR(is_estimate(w), 1.0, 1e-12);
  EXPECT_EQ(always.evaluations(), 500u);
}

TEST(IsEstimate, NoFailuresGivesZero) {
  VmfnmParams p{{component(1.0, 1.0, 2.0, unit(2, 0), 0.0)}};
  const CountedModel never(std::make_shared<HalfSpaceModel>(2, 1e300));
  RngStream rng(6);
  const auto w = importance_weights(sample_mixture(p, 200, rng), p, never);
  for (double v : w) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(is_estimate(w), 0.0);
  EXPECT_EQ(cov_weights(w, 0.0), std::numeric_limits<double>::infinity());
  EXPECT_EQ(cov_estimator(cov_weights(w, 0.0), w.size()), std::numeric_limits<double>::infinity());
}

TEST(IsEstimate, PoolingIsAssociative) {
  RngStream rng(7);
  std::vector<double> a(250), b(250), c(250);
  for (auto* v : {&a, &b, &c})
    for (double& x : *v) x = rng.uniform() < 0.3 ? rng.gamma(2.0) : 0.0;
  std::vector<double> pooled;
  double running = 0.0;
  std::size_t count = 0;
  for (auto* v : {&a, &b, &c}) {
    pooled.insert(pooled.end(), v->begin(), v->end());
    running = (running * count + std::accumulate(v->begin(), v->end(), 0.0)) /
              static_cast<double>(count + v->size());
    count += v->size();
  }
  EXPECT_NEAR(is_estimate(pooled), running, 1e-15);
  std::vector<double> again(a);
  again.insert(again.end(), b.begin(), b.end());
  again.insert(again.end(), c.begin(), c.end());
  EXPECT_EQ(is_estimate(again), is_estimate(pooled));
}

// --- effective niches ---------------------------------------------------------------------

TEST(EffectiveNiches, SingleComponentIsOne) {
  VmfnmParams p{{component(1.0, 2.0, 4.0, unit(3, 0), 10.0)}};
  RngStream rng(8);
  EXPECT_EQ(effective_niches(points_of(sample_mixture(p, 1000, rng)), p), 1.0);
}

TEST(EffectiveNiches, IdenticalComponentsCollapse) {
  const VmfnComponent c = component(0.2, 2.0, 4.0, unit(3, 0), 10.0);
  VmfnmParams p{{c, c}};
  p.components[1].pi = 0.8;
  RngStream rng(9);
  EXPECT_NEAR(effective_niches(points_of(sample_mixture(p, 1000, rng)), p), 1.0, 1e-12);
}

TEST(EffectiveNiches, DisjointPairCountsTwo) {
  VmfnmParams p{{component(0.5, 2.0, 4.0, unit(3, 0), 200.0),
                 component(0.5, 2.0, 4.0, unit(3, 0, -1.0), 200.0)}};
  RngStream rng(10);
  EXPECT_NEAR(effective_niches(points_of(sample_mixture(p, 10'000, rng)), p), 2.0, 0.05);
}

TEST(EffectiveNiches, ClampedToRange) {
  EXPECT_EQ(effective_niches(std::vector<double>{-1.0, -2.0}, 3), 1.0);
  EXPECT_EQ(effective_niches(std::vector<double>{5.0}, 3), 3.0);
  EXPECT_EQ(effective_niches(std::vector<double>{}, 3), 1.0);
  EXPECT_THROW(effective_niches(std::vector<double>{0.1}, 0), std::invalid_argument);
}

// --- CoV estimators --------------------------------------------------------------------------

TEST(Cov, IdenticalWeights) {
  const std::vector<double> w(40, 0.25);
  EXPECT_EQ(cov_weights(w, is_estimate(w)), 0.0);
  EXPECT_EQ(cov_estimator(0.0, w.size()), 0.0);
}

TEST(Cov, HandComputed) {
  const std::vector<double> w{2.0, 0.0};
  EXPECT_DOUBLE_EQ(cov_weights(w, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(cov_estimator(1.0, 2), 1.0 / std::sqrt(2.0));
}

TEST(Cov, QuadruplingHalves) {
  EXPECT_DOUBLE_EQ(cov_estimator(3.0, 1000) / cov_estimator(3.0, 4000), 2.0);
}

// --- configuration -------------------------------------------------------------------------------

TEST(NisConfig, DefaultsValidate) {
  NisConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.importance_sample_size, 250u);
  EXPECT_EQ(cfg.budget_multiplier, 30.0);
  NisConfig bad = cfg;
  bad.importance_sample_size = 1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.estimator_cov_target = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.budget_multiplier = 0.5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

// --- full runs -------------------------------------------------------------------------------------

TEST(NisRun, HalfSpaceMatchesNormalTail) {
  const double ref = normal_cdf(-3.0);
  int good = 0;
  const int runs = 100;
  for (int i = 0; i < runs; ++i) {
    const CountedModel model(make_model("halfspace"));
    const NisResult r = nis_run(model, NisConfig{}, RngStream(77).split(i));
    if (r.converged && r.delta_is <= 0.1 && std::abs(r.p_hat / ref - 1.0) < 0.3) ++good;
  }
  EXPECT_GE(good, 95);
}

TEST(NisRun, HalfSpaceWithinReportedError) {
  const double ref = normal_cdf(-3.0);
  const CountedModel model(make_model("halfspace"));
  const NisResult r = nis_run(model, NisConfig{}, RngStream(12));
  ASSERT_TRUE(r.converged);
  EXPECT_LT(std::abs(r.p_hat - ref), 3.0 * r.delta_is * r.p_hat);
}

TEST(NisRun, TraceIsComplete) {
  const CountedModel model(make_model("pwl"));
  const NisResult r = nis_run(model, NisConfig{}, RngStream(13));
  ASSERT_FALSE(r.trace.empty());
  EXPECT_TRUE(r.trace.front().refit);
  EXPECT_EQ(r.trace.front().budget, 750.0);
  EXPECT_EQ(r.evaluations, model.evaluations());
  std::size_t previous_evals = 0;
  for (const NisIteration& it : r.trace) {
    EXPECT_EQ(it.chain_lengths.size(), r.chains.size());
    EXPECT_EQ(it.alpha.size(), r.chains.size());
    EXPECT_NEAR(std::accumulate(it.alpha.begin(), it.alpha.end(), 0.0), 1.0, 1e-10);
    EXPECT_GE(it.effective_niches, 1.0);
    EXPECT_LE(it.effective_niches, static_cast<double>(it.components));
    EXPECT_GE(it.batches, 1u);
    EXPECT_GE(it.evaluations, previous_evals);
    previous_evals = it.evaluations;
    EXPECT_TRUE(std::isfinite(it.p_hat));
  }
  const NisIteration& last = r.trace.back();
  EXPECT_EQ(r.importance_weights.size(), last.batches * 250);
  EXPECT_EQ(r.importance_samples.size(), r.importance_weights.size());
  EXPECT_DOUBLE_EQ(r.p_hat, is_estimate(r.importance_weights));
  EXPECT_EQ(r.p_hat, last.p_hat);
  EXPECT_EQ(r.stop_reason == "converged", r.converged);
}

TEST(NisRun, ChainsStayInFailureRegion) {
  const CountedModel model(make_model("meatball"));
  const NisResult r = nis_run(model, NisConfig{}, RngStream(14));
  const CountedModel checker(make_model("meatball"));
  for (const auto& chain : r.chains.chains)
    for (const auto& s : chain) {
      EXPECT_GE(s.g, 0.0);
      EXPECT_EQ(s.g, checker.model().evaluate(s.x));
    }
  EXPECT_NO_THROW(r.params.validate());
}

TEST(NisRun, BatchesPoolOnlyWithinOneFit) {
  const CountedModel model(make_model("pwl"));
  const NisResult r = nis_run(model, NisConfig{}, RngStream(15));
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    if (r.trace[i].refit) {
      EXPECT_EQ(r.trace[i].batches, 1u);
    } else {
      EXPECT_EQ(r.trace[i].batches, r.trace[i - 1].batches + 1);
    }
  }
}

TEST(NisRun, ImmediateConvergenceFitsOnce) {
  // Loose targets: the first batch satisfies both.
  NisConfig cfg;
  cfg.estimator_cov_target = 10.0;
  cfg.weights_cov_target = 1e6;
  const CountedModel model(make_model("halfspace"));
  const NisResult r = nis_run(model, cfg, RngStream(16));
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_TRUE(r.trace[0].refit);
  EXPECT_EQ(r.trace[0].batches, 1u);
  EXPECT_TRUE(r.converged);
}

TEST(NisRun, IterationCapReportsNonConverged) {
  NisConfig cfg;
  cfg.estimator_cov_target = 1e-9;
  cfg.max_iterations = 3;
  const CountedModel model(make_model("halfspace"));
  const NisResult r = nis_run(model, cfg, RngStream(17));
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.stop_reason, "iteration_cap");
  EXPECT_EQ(r.trace.size(), 3u);
}

TEST(NisRun, EvaluationCapReportsNonConverged) {
  NisConfig cfg;
  cfg.estimator_cov_target = 1e-9;
  cfg.max_evaluations = 3000;
  const CountedModel model(make_model("halfspace"));
  const NisResult r = nis_run(model, cfg, RngStream(18));
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.stop_reason, "evaluation_cap");
  EXPECT_GE(r.evaluations, 3000u);
}

TEST(NisRun, DeterministicForSeed) {
  const CountedModel m1(make_model("meatball"));
  const CountedModel m2(make_model("meatball"));
  const NisResult a = nis_run(m1, NisConfig{}, RngStream(19));
  const NisResult b = nis_run(m2, NisConfig{}, RngStream(19));
  EXPECT_EQ(a.p_hat, b.p_hat);
  EXPECT_EQ(a.evaluations, b.evaluations);
  EXPECT_EQ(a.params, b.params);
}
