#include "nis/ninits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nis {

std::vector<double> default_noise_sequence() {
  std::vector<double> seq(101);
  for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = 0.04 * static_cast<double>(i);
  return seq;
}

std::size_t NinitsConfig::chain_length() const {
  if (!(level_probability > 0.0 && level_probability <= 1.0))
    throw std::invalid_argument("ninits: level probability must lie in (0, 1]");
  const double inverse = 1.0 / level_probability;
  const double rounded = std::round(inverse);
  if (std::abs(inverse - rounded) > 1e-9 * rounded)
    throw std::invalid_argument("ninits: 1 / level probability must be an integer");
  return static_cast<std::size_t>(rounded);
}

void NinitsConfig::validate() const {
  (void)chain_length();
  if (noise_sequence.empty()) throw std::invalid_argument("ninits: empty noise sequence");
  for (std::size_t i = 0; i < noise_sequence.size(); ++i) {
    if (!(noise_sequence[i] >= 0.0)) throw std::invalid_argument("ninits: negative noise scale");
    if (i > 0 && !(noise_sequence[i - 1] < noise_sequence[i]))
      throw std::invalid_argument("ninits: noise sequence must be strictly increasing");
  }
  if (convergence_limit < 1 || length_limit < 1)
    throw std::invalid_argument("ninits: convergence and length limits must be at least 1");
  if (!(proposal_scale > 0.0)) throw std::invalid_argument("ninits: proposal scale must be positive");
}

bool hill_valley_test(const ChainState& x, const ChainState& y, const CountedModel& model) {
  Vector mid(x.x.size());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * (x.x[i] + y.x[i]);
  return model.evaluate(mid) >= std::min(x.g, y.g);
}

bool is_admissible(const ChainState& x, std::span<const ChainState> reps,
                   const CountedModel& model, std::uint64_t* midpoints) {
  for (const ChainState& rep : reps) {
    if (midpoints != nullptr) ++*midpoints;
    if (hill_valley_test(rep, x, model)) return false;
  }
  return true;
}

const char* to_string(ChainRunOutcome outcome) {
  switch (outcome) {
    case ChainRunOutcome::failure_found: return "failure_found";
    case ChainRunOutcome::converged: return "converged";
    case ChainRunOutcome::length_capped: return "length_capped";
  }
  return "unknown";
}

std::optional<ChainRunOutcome> chain_stop(const ChainRunRecord& run, const NinitsConfig& config) {
  if (run.chains.empty()) throw std::invalid_argument("chain_stop: run has no chains");
  for (const ChainState& s : run.chains.back())
    if (s.g >= 0.0) return ChainRunOutcome::failure_found;
  const std::size_t m = run.thresholds.size();
  if (m > config.convergence_limit &&
      run.thresholds[m - 1] == run.thresholds[m - 1 - config.convergence_limit])
    return ChainRunOutcome::converged;
  if (m > config.length_limit) return ChainRunOutcome::length_capped;
  return std::nullopt;
}

std::optional<SeedDraw> sample_seed(std::span<const ChainState> reps, const NinitsConfig& config,
                                    const CountedModel& model, RngStream& rng, SeedStats* stats) {
  const std::size_t d = model.dim();
  for (std::size_t i = 0; i < config.noise_sequence.size(); ++i) {
    const double scale = config.noise_sequence[i];
    ChainState s;
    s.x = sample_std_normal(d, rng);
    for (double& v : s.x) v += scale * rng.normal();
    s.g = model.evaluate(s.x);
    if (stats != nullptr) ++stats->attempts;
    if (is_admissible(s, reps, model, stats != nullptr ? &stats->midpoint_evaluations : nullptr))
      return SeedDraw{std::move(s), i};
  }
  return std::nullopt;
}

namespace {

std::size_t first_argmax(const Chain& chain) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < chain.size(); ++i)
    if (chain[i].g > chain[best].g) best = i;
  return best;
}

}  // namespace

NinitsResult ninits(const CountedModel& model, const NinitsConfig& config, RngStream& rng) {
  config.validate();
  const std::size_t n = config.chain_length();
  const std::uint64_t start_count = model.evaluations();

  NinitsResult result;
  NinitsTrace& trace = result.trace;
  RepresentativeSet& reps = trace.representatives;

  while (result.initial_samples.size() <= config.max_initial_samples) {
    SeedStats seed_stats;
    auto draw = sample_seed(reps, config, model, rng, &seed_stats);
    trace.seed_evaluations += seed_stats.attempts;
    trace.seed_midpoint_evaluations += seed_stats.midpoint_evaluations;
    if (!draw) {
      if (!result.initial_samples.empty()) break;
      if (trace.restarts >= config.restart_cap)
        throw NinitsError("ninits: no failure sample found after " +
                          std::to_string(config.restart_cap) + " restarts of the noise sequence");
      ++trace.restarts;
      continue;
    }

    ChainRunRecord run;
    run.seed = draw->seed;
    run.noise_index = draw->noise_index;

    // Representatives only grow between runs, so the run works on a snapshot.
    const RepresentativeSet snapshot = reps;
    double level = -std::numeric_limits<double>::infinity();
    const StationaryTarget target([&](std::span<const double> x) -> std::optional<double> {
      ++trace.chain_candidate_evaluations;
      const double g = model.evaluate(x);
      if (g < level) return std::nullopt;
      const ChainState candidate{Vector(x.begin(), x.end()), g};
      if (!is_admissible(candidate, snapshot, model, &trace.chain_midpoint_evaluations))
        return std::nullopt;
      return g;
    });

    ChainState chain_seed = draw->seed;
    for (;;) {
      Chain chain = run_chain(std::move(chain_seed), target, n - 1, config.proposal_scale, rng);
      const std::size_t best = first_argmax(chain);
      level = chain[best].g;
      chain_seed = chain[best];
      run.thresholds.push_back(level);
      run.chains.push_back(std::move(chain));
      if (auto outcome = chain_stop(run, config)) {
        run.outcome = *outcome;
        break;
      }
    }

    const Chain& last = run.chains.back();
    if (level >= 0.0) {
      std::size_t newest = last.size();
      while (newest-- > 0)
        if (last[newest].g >= 0.0) break;
      result.initial_samples.push_back(last[newest]);
      reps.push_back(last[newest]);
      run.produced_initial_sample = true;
    } else {
      reps.push_back(last[first_argmax(last)]);
    }
    trace.runs.push_back(std::move(run));
  }

  result.evaluations = model.evaluations() - start_count;
  return result;
}

}  // namespace nis
