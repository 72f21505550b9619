#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nis/performance_models.hpp"
#include "nis/polar.hpp"
#include "nis/rng.hpp"

namespace nis {

/// A chain state together with its cached performance value.
struct ChainState {
  Vector x;
  double g = 0.0;
};

using Chain = std::vector<ChainState>;

/// Stationary density f(x) * 1_S(x) with f the standard normal. The
/// indicator receives a candidate and returns its performance value if the
/// candidate lies in S, or nothing if it does not. It is responsible for
/// any performance evaluations it needs.
class StationaryTarget {
 public:
  using Indicator = std::function<std::optional<double>(std::span<const double>)>;

  explicit StationaryTarget(Indicator indicator) : indicator_(std::move(indicator)) {}

  [[nodiscard]] std::optional<double> admit(std::span<const double> x) const {
    return indicator_(x);
  }

 private:
  Indicator indicator_;
};

/// Target 1_F: admits x iff g(x) >= 0, one counted evaluation per call.
StationaryTarget failure_target(const CountedModel& model);

/// Componentwise acceptance probability min(1, phi(proposal) / phi(current)).
double mm_acceptance(double current, double proposal);

/// One Modified Metropolis transition. Each coordinate is proposed from
/// Normal(x_i, sigma^2) and accepted with mm_acceptance; the assembled
/// candidate is then checked against the target and discarded if it falls
/// outside. When every coordinate was rejected the candidate is the current
/// state, and the target is not consulted (the cached value stands).
ChainState mm_step(const ChainState& current, const StationaryTarget& target, double sigma,
                   RngStream& rng);

/// Appends `steps` states to `chain`, each an mm_step from its predecessor.
/// The chain must already hold a seed.
void extend_chain(Chain& chain, const StationaryTarget& target, std::size_t steps, double sigma,
                  RngStream& rng);

/// Seed followed by `steps` new states (steps + 1 states in total).
Chain run_chain(ChainState seed, const StationaryTarget& target, std::size_t steps, double sigma,
                RngStream& rng);

}  // namespace nis
