#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nis/markov.hpp"
#include "nis/ninits.hpp"
#include "nis/performance_models.hpp"
#include "nis/rng.hpp"
#include "nis/vmfnm.hpp"

namespace nis {

struct NisConfig {
  double budget_multiplier = 30.0;
  std::size_t importance_sample_size = 250;
  double weights_cov_target = 5.0;
  double estimator_cov_target = 0.1;
  double proposal_scale = 0.8;
  std::size_t max_iterations = 100;
  std::uint64_t max_evaluations = 1'000'000;
  NinitsConfig ninits;
  EmOptions em;

  void validate() const;
};

/// T = M * K_eff * max(d, 25), real-valued.
double total_budget(double budget_multiplier, double effective_niches, std::size_t dim);

/// Markov chains targeting 1_F f, one per initial sample, with weights.
struct ChainSet {
  std::vector<Chain> chains;
  std::vector<double> alpha;

  [[nodiscard]] std::size_t size() const noexcept { return chains.size(); }
  [[nodiscard]] std::size_t total_states() const noexcept;
  [[nodiscard]] std::vector<std::size_t> lengths() const;
};

/// Appends floor(alpha_k * T) Modified Metropolis steps to chain k. Chain k
/// draws from rng.split(k). Returns the number of states added per chain.
std::vector<std::size_t> update_chains(ChainSet& chains, const StationaryTarget& target,
                                       double budget, double sigma, const RngStream& rng);

/// W_i = 1_F(x_i) exp(ln f(x_i) - ln q(x_i)) for one batch of samples drawn
/// from `params`. Failure is decided with model.is_failure.
std::vector<double> importance_weights(std::span<const LabeledPoint> samples,
                                       const VmfnmParams& params, const CountedModel& model);

/// Mean of the pooled weights.
double is_estimate(std::span<const double> weights);

/// Per-sample mutual information terms sum_k gamma_ik ln(gamma_ik / pi_k).
std::vector<double> mutual_information_terms(std::span<const PolarPoint> points,
                                             const VmfnmParams& params);

/// exp of the mean mutual information term, clamped to [1, K].
double effective_niches(std::span<const double> mi_terms, std::size_t components);
double effective_niches(std::span<const PolarPoint> points, const VmfnmParams& params);

/// sqrt(sum (W_i - P)^2 / (N P^2)); +inf when P is zero.
double cov_weights(std::span<const double> weights, double p_hat);

/// delta_w / sqrt(N); +inf when delta_w is.
double cov_estimator(double delta_w, std::size_t pooled_count);

struct NisIteration {
  std::size_t iteration = 0;
  bool refit = false;
  std::size_t batches = 0;
  double p_hat = 0.0;
  double delta_w = 0.0;
  double delta_is = 0.0;
  double effective_niches = 1.0;
  double budget = 0.0;
  std::vector<std::size_t> chain_lengths;
  std::vector<double> alpha;
  std::size_t components = 0;
  std::size_t em_iterations = 0;
  std::uint64_t evaluations = 0;
};

struct NisResult {
  double p_hat = 0.0;
  double delta_is = 0.0;
  double delta_w = 0.0;
  double effective_niches = 1.0;
  bool converged = false;
  /// "converged", "iteration_cap" or "evaluation_cap".
  std::string stop_reason;
  std::uint64_t evaluations = 0;
  std::vector<NisIteration> trace;

  NinitsResult initial;
  ChainSet chains;
  VmfnmParams params;
  /// Current importance-sample pool with labels and weights.
  std::vector<LabeledPoint> importance_samples;
  std::vector<double> importance_weights;
};

/// Runs niching initial sampling followed by the importance sampling loop.
/// The counter of `model` is charged for every evaluation; the evaluation
/// total in the result is the difference over the call.
NisResult nis_run(const CountedModel& model, const NisConfig& config, const RngStream& rng);

}  // namespace nis
