#include "nis/nis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace nis {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Sub-stream tags under the run's stream.
constexpr std::uint64_t kInitialStream = 0;
constexpr std::uint64_t kChainStream = 1;
constexpr std::uint64_t kImportanceStream = 2;
}  // namespace

void NisConfig::validate() const {
  if (!(budget_multiplier >= 1.0)) throw std::invalid_argument("nis: budget multiplier must be >= 1");
  if (importance_sample_size < 2) throw std::invalid_argument("nis: importance sample size must be >= 2");
  if (!(weights_cov_target > 0.0) || !(estimator_cov_target > 0.0))
    throw std::invalid_argument("nis: CoV targets must be positive");
  if (!(proposal_scale > 0.0)) throw std::invalid_argument("nis: proposal scale must be positive");
  if (max_iterations < 1) throw std::invalid_argument("nis: iteration cap must be positive");
  ninits.validate();
}

double total_budget(double budget_multiplier, double effective_niches, std::size_t dim) {
  return budget_multiplier * effective_niches * static_cast<double>(std::max<std::size_t>(dim, 25));
}

std::size_t ChainSet::total_states() const noexcept {
  std::size_t n = 0;
  for (const auto& c : chains) n += c.size();
  return n;
}

std::vector<std::size_t> ChainSet::lengths() const {
  std::vector<std::size_t> out;
  out.reserve(chains.size());
  for (const auto& c : chains) out.push_back(c.size());
  return out;
}

std::vector<std::size_t> update_chains(ChainSet& chains, const StationaryTarget& target,
                                       double budget, double sigma, const RngStream& rng) {
  if (chains.alpha.size() != chains.chains.size())
    throw std::invalid_argument("update_chains: one weight per chain required");
  std::vector<std::size_t> added(chains.size());
  for (std::size_t k = 0; k < chains.size(); ++k) {
    const double steps = std::floor(chains.alpha[k] * budget);
    added[k] = steps > 0.0 ? static_cast<std::size_t>(steps) : 0;
    RngStream chain_rng = rng.split(k);
    extend_chain(chains.chains[k], target, added[k], sigma, chain_rng);
  }
  return added;
}

std::vector<double> importance_weights(std::span<const LabeledPoint> samples,
                                       const VmfnmParams& params, const CountedModel& model) {
  MixtureDensity density(params);
  std::vector<double> w(samples.size(), 0.0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const PolarPoint& p = samples[i].point;
    if (!model.is_failure(from_polar(p))) continue;
    w[i] = std::exp(log_std_normal_polar(p) - density.log_density(p));
  }
  return w;
}

double is_estimate(std::span<const double> weights) {
  if (weights.empty()) return 0.0;
  return std::accumulate(weights.begin(), weights.end(), 0.0) / static_cast<double>(weights.size());
}

std::vector<double> mutual_information_terms(std::span<const PolarPoint> points,
                                             const VmfnmParams& params) {
  MixtureDensity density(params);
  std::vector<double> gamma(params.size());
  std::vector<double> out(points.size(), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    density.log_density_and_posterior(points[i], gamma);
    double s = 0.0;
    for (std::size_t k = 0; k < gamma.size(); ++k) {
      const double pi = params.components[k].pi;
      if (gamma[k] > 0.0 && pi > 0.0) s += gamma[k] * std::log(gamma[k] / pi);
    }
    out[i] = s;
  }
  return out;
}

double effective_niches(std::span<const double> mi_terms, std::size_t components) {
  if (components == 0) throw std::invalid_argument("effective_niches: no components");
  if (mi_terms.empty()) return 1.0;
  const double mean = is_estimate(mi_terms);
  return std::clamp(std::exp(mean), 1.0, static_cast<double>(components));
}

double effective_niches(std::span<const PolarPoint> points, const VmfnmParams& params) {
  return effective_niches(mutual_information_terms(points, params), params.size());
}

double cov_weights(std::span<const double> weights, double p_hat) {
  if (!(p_hat > 0.0) || weights.empty()) return kInf;
  double ss = 0.0;
  for (double w : weights) ss += (w - p_hat) * (w - p_hat);
  return std::sqrt(ss / (static_cast<double>(weights.size()) * p_hat * p_hat));
}

double cov_estimator(double delta_w, std::size_t pooled_count) {
  if (!std::isfinite(delta_w) || pooled_count == 0) return kInf;
  return delta_w / std::sqrt(static_cast<double>(pooled_count));
}

NisResult nis_run(const CountedModel& model, const NisConfig& config, const RngStream& rng) {
  config.validate();
  const std::uint64_t start_count = model.evaluations();
  const std::size_t d = model.dim();

  NisResult result;
  RngStream initial_rng = rng.split(kInitialStream);
  result.initial = ninits(model, config.ninits, initial_rng);

  const std::size_t K = result.initial.initial_samples.size();
  ChainSet& chains = result.chains;
  for (const ChainState& s : result.initial.initial_samples) chains.chains.push_back({s});
  chains.alpha.assign(K, 1.0 / static_cast<double>(K));

  const StationaryTarget target = failure_target(model);
  double k_eff = 1.0;
  double delta_w = kInf;
  double delta_is = kInf;
  std::size_t batches = 0;
  std::vector<double> mi_terms;

  for (std::size_t iteration = 1;; ++iteration) {
    if (delta_is <= config.estimator_cov_target) {
      result.converged = true;
      result.stop_reason = "converged";
      break;
    }
    if (iteration > config.max_iterations) {
      result.stop_reason = "iteration_cap";
      break;
    }
    if (model.evaluations() - start_count >= config.max_evaluations) {
      result.stop_reason = "evaluation_cap";
      break;
    }

    NisIteration record;
    record.iteration = iteration;
    if (delta_w > config.weights_cov_target) {
      record.refit = true;
      record.budget = total_budget(config.budget_multiplier, k_eff, d);
      update_chains(chains, target, record.budget, config.proposal_scale,
                    rng.split(kChainStream).split(iteration));

      std::vector<PolarPoint> points;
      std::vector<std::size_t> labels;
      points.reserve(chains.total_states());
      labels.reserve(chains.total_states());
      for (std::size_t k = 0; k < K; ++k) {
        for (const ChainState& s : chains.chains[k]) {
          points.push_back(to_polar(s.x));
          labels.push_back(k);
        }
      }
      const PosteriorMatrix membership = PosteriorMatrix::one_hot(labels, K);
      EmResult em = em_fit(points, membership, config.em);
      record.em_iterations = em.iterations;
      const std::vector<double> log_ratios = log_importance_ratios(points, em.params);
      result.params = weight_correction(log_ratios, em.params, em.posterior);
      chains.alpha = chain_weights(log_ratios, membership);

      batches = 0;
      result.importance_samples.clear();
      result.importance_weights.clear();
      mi_terms.clear();
    }

    RngStream batch_rng = rng.split(kImportanceStream).split(iteration);
    std::vector<LabeledPoint> batch =
        sample_mixture(result.params, config.importance_sample_size, batch_rng);
    const std::vector<double> weights = importance_weights(batch, result.params, model);
    std::vector<PolarPoint> batch_points;
    batch_points.reserve(batch.size());
    for (const auto& lp : batch) batch_points.push_back(lp.point);
    const std::vector<double> batch_mi = mutual_information_terms(batch_points, result.params);

    ++batches;
    result.importance_weights.insert(result.importance_weights.end(), weights.begin(), weights.end());
    mi_terms.insert(mi_terms.end(), batch_mi.begin(), batch_mi.end());
    for (auto& lp : batch) result.importance_samples.push_back(std::move(lp));

    const std::size_t pooled = result.importance_weights.size();
    result.p_hat = is_estimate(result.importance_weights);
    k_eff = effective_niches(mi_terms, result.params.size());
    delta_w = cov_weights(result.importance_weights, result.p_hat);
    delta_is = cov_estimator(delta_w, pooled);

    record.batches = batches;
    record.p_hat = result.p_hat;
    record.delta_w = delta_w;
    record.delta_is = delta_is;
    record.effective_niches = k_eff;
    record.chain_lengths = chains.lengths();
    record.alpha = chains.alpha;
    record.components = result.params.size();
    record.evaluations = model.evaluations() - start_count;
    result.trace.push_back(std::move(record));
  }

  result.delta_w = delta_w;
  result.delta_is = delta_is;
  result.effective_niches = k_eff;
  result.evaluations = model.evaluations() - start_count;
  return result;
}

}  // namespace nis
