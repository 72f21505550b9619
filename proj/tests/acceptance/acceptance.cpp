// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "nis/harness.hpp"
#include "nis/markov.hpp"
#include "nis/ninits.hpp"
#include "nis/nis.hpp"
#include "nis/performance_models.hpp"
#include "nis/special_functions.hpp"
#include "nis/vmfnm.hpp"

using namespace nis;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s  %-34s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentResult repeat(const std::string& model, std::size_t dim, std::size_t runs,
                        std::uint64_t seed) {
  ExperimentConfig c;
  c.model = model;
  c.dim = dim;
  c.repetitions = runs;
  c.seed = seed;
  c.threads = 0;
  return run_experiment(c);
}

SummaryTable head(const ExperimentResult& r, std::size_t n) {
  std::vector<RunRecord> first(r.records.begin(), r.records.begin() + n);
  return summarize(first, r.summary.model, r.summary.dim, "nis", std::nullopt);
}

std::string describe(const SummaryTable& s) {
  return fmt("runs=%zu converged=%zu mean=%.4e cov=%.3f evals=%.0f", s.repetitions,
             s.converged_runs, s.mean_p_hat, s.cov_p_hat, s.mean_g_evals);
}

bool in_band(double v, double lo, double hi) { return v >= lo && v <= hi; }

void table_criterion(const std::string& name, const SummaryTable& s, double lo, double hi,
                     double max_cov, double max_evals) {
  const bool ok = in_band(s.mean_p_hat, lo, hi) && s.cov_p_hat <= max_cov &&
                  s.mean_g_evals <= max_evals && s.excluded_runs == 0;
  std::string limits = fmt(" | want mean in [%.2e, %.2e], cov <= %.2f", lo, hi, max_cov);
  if (std::isfinite(max_evals)) limits += fmt(", evals <= %.0f", max_evals);
  report(name, ok, describe(s) + limits);
}

void degeneracy_criterion(const std::string& name, const ExperimentResult& r, double reference) {
  std::size_t below = 0;
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& rec : r.records) {
    lowest = std::min(lowest, rec.p_hat);
    if (rec.p_hat < reference / 10.0) ++below;
  }
  report(name, below == 0,
         fmt("runs=%zu below_ref/10=%zu lowest=%.3e ref=%.3e", r.records.size(), below, lowest,
             reference));
}

void mc_criterion(const std::string& name, const std::string& model, std::uint64_t n,
                  double reference, std::uint64_t seed) {
  const McResult mc = mc_reference(*make_model(model), n, RngStream(seed), 0);
  const double se = std::sqrt(reference * (1.0 - reference) / static_cast<double>(n));
  const double z = (mc.p_hat - reference) / se;
  report(name, std::abs(z) <= 3.0,
         fmt("n=%.0e p_hat=%.5e ref=%.3e se=%.2e z=%.2f", static_cast<double>(n), mc.p_hat,
             reference, se, z));
}

void halfspace_criterion(std::size_t dim, std::uint64_t seed) {
  const ExperimentResult r = repeat("halfspace", dim, 30, seed);
  const double ref = normal_cdf(-3.0);
  bool deltas_ok = true;
  double worst = 0.0;
  for (const auto& rec : r.records) {
    if (!rec.converged) continue;
    worst = std::max(worst, rec.delta);
    deltas_ok = deltas_ok && rec.delta <= 0.1;
  }
  const double rel = std::abs(r.summary.mean_p_hat / ref - 1.0);
  report(fmt("7 halfspace d=%zu", dim), rel <= 0.2 && deltas_ok && r.summary.converged_runs > 0,
         describe(r.summary) + fmt(" rel_err=%.3f max_delta_is=%.4f | want rel_err <= 0.2, "
                                   "delta_is <= 0.1",
                                   rel, worst));
}

// --- compact property suites ----------------------------------------------------------

VmfnComponent component(double pi, double m, double omega, Vector mu, double kappa) {
  VmfnComponent c;
  c.pi = pi;
  c.m = m;
  c.omega = omega;
  c.mu = std::move(mu);
  c.kappa = kappa;
  return c;
}

Vector axis(std::size_t d, std::size_t i, double s = 1.0) {
  Vector v(d, 0.0);
  v[i] = s;
  return v;
}

std::vector<PolarPoint> points_of(const std::vector<LabeledPoint>& s) {
  std::vector<PolarPoint> out;
  for (const auto& lp : s) out.push_back(lp.point);
  return out;
}

void property_em() {
  VmfnmParams truth{{component(0.3, 2.0, 4.0, axis(3, 0), 100.0),
                     component(0.7, 2.0, 4.0, axis(3, 0, -1.0), 100.0)}};
  RngStream rng(9001);
  const auto s = sample_mixture(truth, 10'000, rng);
  std::vector<std::size_t> labels;
  for (const auto& lp : s) labels.push_back(lp.component);
  const EmResult fit = em_fit(points_of(s), PosteriorMatrix::one_hot(labels, 2));
  bool valid = true;
  double sum = 0.0;
  for (const auto& c : fit.params.components) {
    sum += c.pi;
    valid = valid && c.m >= 0.5 && c.kappa >= 0.0 && c.omega > 0.0 &&
            std::abs(norm(c.mu) - 1.0) <= 1e-10;
  }
  valid = valid && std::abs(sum - 1.0) <= 1e-10;
  const double e0 = std::abs(fit.params.components[0].pi - 0.3);
  const double e1 = std::abs(fit.params.components[1].pi - 0.7);
  report("9 em invariants + recovery", valid && fit.params.size() == 2 && e0 <= 0.03 && e1 <= 0.03,
         fmt("sum_pi-1=%.1e weight_err=(%.4f, %.4f)", sum - 1.0, e0, e1));
}

void property_effective_niches() {
  RngStream rng(9002);
  VmfnmParams one{{component(1.0, 2.0, 4.0, axis(3, 0), 10.0)}};
  const double k1 = effective_niches(points_of(sample_mixture(one, 1000, rng)), one);
  VmfnmParams two{{component(0.5, 2.0, 4.0, axis(3, 0), 200.0),
                   component(0.5, 2.0, 4.0, axis(3, 0, -1.0), 200.0)}};
  const double k2 = effective_niches(points_of(sample_mixture(two, 10'000, rng)), two);
  report("9 exp(MI) in [1, K]", k1 == 1.0 && std::abs(k2 - 2.0) <= 0.05 && k2 <= 2.0,
         fmt("K=1 -> %.6f, disjoint pair -> %.4f", k1, k2));
}

void property_mm_ks() {
  const StationaryTarget target([](std::span<const double> x) -> std::optional<double> {
    if (x[0] >= 1.0) return x[0] - 1.0;
    return std::nullopt;
  });
  RngStream rng(9003);
  const std::size_t thin = 20, n = 100'000;
  const Chain chain = run_chain({{1.0}, 0.0}, target, n * thin, 0.8, rng);
  std::vector<double> xs;
  for (std::size_t i = thin; i < chain.size(); i += thin) xs.push_back(chain[i].x[0]);
  std::sort(xs.begin(), xs.end());
  double ks = 0.0;
  const double tail = normal_cdf(-1.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double cdf = (normal_cdf(xs[i]) - normal_cdf(1.0)) / tail;
    ks = std::max({ks, std::abs(cdf - double(i) / xs.size()), std::abs(cdf - double(i + 1) / xs.size())});
  }
  report("9 modified metropolis KS", ks < 0.01, fmt("KS=%.5f (n=%zu) | want < 0.01", ks, xs.size()));
}

class OneDim final : public PerformanceModel {
 public:
  explicit OneDim(std::function<double(double)> f) : f_(std::move(f)) {}
  std::size_t dim() const override { return 1; }
  std::string name() const override { return "1d"; }
  double evaluate(std::span<const double> x) const override { return f_(x[0]); }

 private:
  std::function<double(double)> f_;
};

void property_hill_valley() {
  const CountedModel sq(std::make_shared<OneDim>([](double t) { return t * t; }));
  const CountedModel lin(std::make_shared<OneDim>([](double t) { return t; }));
  const ChainState a{{-1.0}, 1.0}, b{{1.0}, 1.0}, z{{0.0}, 0.0}, two{{2.0}, 2.0};
  const bool same = hill_valley_test(a, a, sq);
  const bool valley = !hill_valley_test(a, b, sq);
  const bool slope = hill_valley_test(z, two, lin);
  report("9 hill-valley truth table", same && valley && slope,
         fmt("chi(x,x)=%d chi(-1,1;t^2)=%d chi(0,2;t)=%d", same, !valley, slope));
}

void property_lift() {
  const std::uint64_t n = 1'000'000;
  const McResult base = mc_reference(*make_model("pwl"), n, RngStream(9004), 0);
  const McResult lifted = mc_reference(*make_model("pwl", 20), n, RngStream(9005), 0);
  const double p = 3.19579e-5;
  const double se = std::sqrt(2.0 * p * (1.0 - p) / n);
  const double z = (lifted.p_hat - base.p_hat) / se;
  report("9 lift preserves probability", std::abs(z) <= 3.0,
         fmt("d=2 %.3e  d=20 %.3e  z=%.2f", base.p_hat, lifted.p_hat, z));
}

void property_pooling() {
  RngStream rng(9006);
  std::vector<std::vector<double>> batches(4, std::vector<double>(250));
  for (auto& b : batches)
    for (double& w : b) w = rng.uniform() < 0.2 ? rng.gamma(1.5) : 0.0;
  std::vector<double> pooled;
  double running = 0.0;
  std::size_t count = 0;
  for (const auto& b : batches) {
    pooled.insert(pooled.end(), b.begin(), b.end());
    running = (running * count + std::accumulate(b.begin(), b.end(), 0.0)) / double(count + b.size());
    count += b.size();
  }
  const double diff = std::abs(is_estimate(pooled) - running);
  report("9 pooled estimator associativity", diff <= 1e-15 * std::abs(running) + 1e-300,
         fmt("|pooled - incremental| = %.1e", diff));
}

void property_special_functions() {
  double worst_bessel = 0.0;
  for (double x : {1e-3, 0.5, 1.0, 10.0, 100.0, 1e3, 1e4, 1e5}) {
    const double half = 0.5 * std::log(2.0 / (std::numbers::pi * x));
    // log sinh and log cosh, written stably for large x.
    const double lsinh = x > 20 ? x - std::log(2.0) + std::log1p(-std::exp(-2 * x)) : std::log(std::sinh(x));
    const double lcosh = x > 20 ? x - std::log(2.0) + std::log1p(std::exp(-2 * x)) : std::log(std::cosh(x));
    const double i_half = half + lsinh;
    // I_{3/2}(x) = sqrt(2/(pi x)) (cosh x - sinh x / x)
    const double i_three_half =
        half + lcosh + std::log1p(-std::exp(lsinh - lcosh) / x);
    worst_bessel = std::max(worst_bessel, std::abs(log_bessel_i(0.5, x) - i_half) / std::abs(i_half));
    if (x >= 0.5)
      worst_bessel = std::max(worst_bessel,
                              std::abs(log_bessel_i(1.5, x) - i_three_half) / std::abs(i_three_half));
  }
  double worst_gamma = 0.0;
  for (double a : {0.5, 1.0, 6.0, 30.0})
    for (double p : {1e-12, 1e-6, 0.01, 0.3, 0.5, 0.9, 0.999999}) {
      const double x = inverse_regularized_gamma_p(a, p);
      const double r = p < 0.5 ? regularized_gamma_p(a, x) / p - 1.0
                               : regularized_gamma_q(a, x) / (1.0 - p) - 1.0;
      worst_gamma = std::max(worst_gamma, std::abs(r));
    }
  report("9 special functions", worst_bessel <= 1e-10 && worst_gamma <= 1e-12,
         fmt("bessel rel=%.1e (<=1e-10) inv_gamma rel=%.1e (<=1e-12)", worst_bessel, worst_gamma));
}

void tdof_conditional() {
  const McResult mc = mc_reference(*make_model("tdof"), 10'000'000, RngStream(7001), 0);
  const ExperimentResult r = repeat("tdof", 0, 30, 7002);
  const double ratio = r.summary.mean_p_hat / mc.p_hat;
  const bool ref_ok = in_band(mc.p_hat, 1.5e-5, 4.0e-5);
  const bool ratio_ok = ratio >= 1.0 / 1.5 && ratio <= 1.5;
  report("T tdof (conditional)", ref_ok && ratio_ok,
         describe(r.summary) + fmt(" mc=%.4e ratio=%.3f | want mc in [1.5e-5, 4e-5], ratio in "
                                   "[0.667, 1.5]",
                                   mc.p_hat, ratio));
}

template <typename F>
void timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("      (%.1f s)\n", s);
}

}  // namespace

int main() {
  ExperimentResult pwl, meatball;
  timed([&] {
    pwl = repeat("pwl", 0, 100, 101);
    table_criterion("1 piecewise linear d=2", head(pwl, 50), 2.4e-5, 3.9e-5, 0.20, 5000);
  });
  timed([&] {
    meatball = repeat("meatball", 0, 100, 102);
    table_criterion("2 meatball d=2", head(meatball, 50), 0.85e-5, 1.45e-5, 0.20, 8000);
  });
  timed([] {
    table_criterion("3 piecewise linear d=100", repeat("pwl", 100, 30, 103).summary, 2.3e-5,
                    4.1e-5, 0.25, 25000);
  });
  timed([] {
    table_criterion("4 vehicle suspension d=3", repeat("vehicle", 0, 30, 104).summary, 1.0e-6,
                    1.8e-6, 0.15, std::numeric_limits<double>::infinity());
  });
  timed([] {
    table_criterion("5 portfolio n=30", repeat("portfolio-30", 0, 30, 105).summary, 3.4e-3,
                    5.2e-3, 0.20, std::numeric_limits<double>::infinity());
  });
  timed([] { mc_criterion("6 mc piecewise linear 1e8", "pwl", 100'000'000, 3.18e-5, 106); });
  timed([] { mc_criterion("6 mc portfolio n=30 1e7", "portfolio-30", 10'000'000, 4.28e-3, 107); });
  timed([] { halfspace_criterion(2, 108); });
  timed([] { halfspace_criterion(50, 109); });
  degeneracy_criterion("8 no degenerate runs: pwl", pwl, 3.18e-5);
  degeneracy_criterion("8 no degenerate runs: meatball", meatball, 1.12e-5);
  timed([] {
    property_em();
    property_effective_niches();
    property_mm_ks();
    property_hill_valley();
    property_lift();
    property_pooling();
    property_special_functions();
  });
  timed([] { tdof_conditional(); });

  std::printf("%s: %d criterion line(s) failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
