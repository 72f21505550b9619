#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "nis/markov.hpp"
#include "nis/performance_models.hpp"
#include "nis/rng.hpp"

namespace nis {

/// 0.00, 0.04, ..., 4.00 (101 entries).
std::vector<double> default_noise_sequence();

struct NinitsConfig {
  double level_probability = 0.1;
  std::vector<double> noise_sequence = default_noise_sequence();
  std::size_t convergence_limit = 20;
  std::size_t length_limit = 100;
  std::size_t max_initial_samples = 10;
  double proposal_scale = 0.8;
  /// Full passes over the noise sequence that may be repeated while no
  /// initial sample has been found.
  std::size_t restart_cap = 10;

  /// Number of states per chain, 1/p. Throws if 1/p is not an integer.
  [[nodiscard]] std::size_t chain_length() const;
  void validate() const;
};

/// Thrown when the failure region is never reached within the restart cap.
class NinitsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Representatives in insertion order, each with its cached performance.
using RepresentativeSet = std::vector<ChainState>;

/// True (no valley) iff g at the midpoint is at least min(g(x), g(y)).
/// Costs one counted evaluation.
bool hill_valley_test(const ChainState& x, const ChainState& y, const CountedModel& model);

/// True iff every representative is separated from x by a valley. Checks
/// representatives in insertion order and stops at the first one sharing
/// x's hill. `midpoints`, if given, is incremented per evaluation.
bool is_admissible(const ChainState& x, std::span<const ChainState> reps,
                   const CountedModel& model, std::uint64_t* midpoints = nullptr);

enum class ChainRunOutcome { failure_found, converged, length_capped };

const char* to_string(ChainRunOutcome outcome);

struct ChainRunRecord {
  ChainState seed;
  std::size_t noise_index = 0;
  std::vector<Chain> chains;
  /// b_1..b_m, the best performance of each chain.
  std::vector<double> thresholds;
  ChainRunOutcome outcome = ChainRunOutcome::length_capped;
  /// True if the run contributed an initial sample.
  bool produced_initial_sample = false;
};

/// Which stop condition holds for the run so far, if any. Conditions are
/// checked in the order failure, convergence, length.
std::optional<ChainRunOutcome> chain_stop(const ChainRunRecord& run, const NinitsConfig& config);

struct SeedDraw {
  ChainState seed;
  std::size_t noise_index = 0;
};

/// Work counters for one seed search.
struct SeedStats {
  std::uint64_t attempts = 0;
  std::uint64_t midpoint_evaluations = 0;
};

/// Walks the noise sequence: on attempt i draws x = z + sigma_i * e with z,
/// e independent standard normals, evaluates g(x) and accepts the first
/// admissible x. Returns nothing when every attempt is rejected.
std::optional<SeedDraw> sample_seed(std::span<const ChainState> reps, const NinitsConfig& config,
                                    const CountedModel& model, RngStream& rng,
                                    SeedStats* stats = nullptr);

struct NinitsTrace {
  std::vector<ChainRunRecord> runs;
  RepresentativeSet representatives;
  std::size_t restarts = 0;
  std::uint64_t seed_evaluations = 0;
  std::uint64_t seed_midpoint_evaluations = 0;
  std::uint64_t chain_candidate_evaluations = 0;
  std::uint64_t chain_midpoint_evaluations = 0;
};

struct NinitsResult {
  std::vector<ChainState> initial_samples;
  std::uint64_t evaluations = 0;
  NinitsTrace trace;
};

/// Niching initial sampling. Throws NinitsError if no failure sample is
/// found after restart_cap restarts of the noise sequence.
NinitsResult ninits(const CountedModel& model, const NinitsConfig& config, RngStream& rng);

}  // namespace nis
