#include "nis/markov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nis {

StationaryTarget failure_target(const CountedModel& model) {
  return StationaryTarget([&model](std::span<const double> x) -> std::optional<double> {
    const double g = model.evaluate(x);
    if (g >= 0.0) return g;
    return std::nullopt;
  });
}

double mm_acceptance(double current, double proposal) {
  return std::min(1.0, std::exp(0.5 * (current * current - proposal * proposal)));
}

ChainState mm_step(const ChainState& current, const StationaryTarget& target, double sigma,
                   RngStream& rng) {
  Vector candidate = current.x;
  bool moved = false;
  for (double& xi : candidate) {
    const double proposal = xi + sigma * rng.normal();
    // Accept with probability min(1, phi(proposal)/phi(xi)), in log form.
    const double log_ratio = 0.5 * (xi * xi - proposal * proposal);
    if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio) {
      xi = proposal;
      moved = true;
    }
  }
  if (!moved) return current;
  if (auto g = target.admit(candidate)) return {std::move(candidate), *g};
  return current;
}

void extend_chain(Chain& chain, const StationaryTarget& target, std::size_t steps, double sigma,
                  RngStream& rng) {
  if (chain.empty()) throw std::invalid_argument("extend_chain: chain has no seed");
  chain.reserve(chain.size() + steps);
  for (std::size_t i = 0; i < steps; ++i) chain.push_back(mm_step(chain.back(), target, sigma, rng));
}

Chain run_chain(ChainState seed, const StationaryTarget& target, std::size_t steps, double sigma,
                RngStream& rng) {
  Chain chain;
  chain.push_back(std::move(seed));
  extend_chain(chain, target, steps, sigma, rng);
  return chain;
}

}  // namespace nis
