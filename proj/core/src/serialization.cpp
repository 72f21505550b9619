#include "nis/serialization.hpp"

#include <cmath>

namespace nis {

using nlohmann::json;

namespace {

// JSON has no infinity; non-finite values become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void to_json(json& j, const VmfnComponent& c) {
  j = json{{"pi", c.pi}, {"m", c.m}, {"omega", c.omega}, {"mu", c.mu}, {"kappa", c.kappa}};
}

void from_json(const json& j, VmfnComponent& c) {
  j.at("pi").get_to(c.pi);
  j.at("m").get_to(c.m);
  j.at("omega").get_to(c.omega);
  j.at("mu").get_to(c.mu);
  j.at("kappa").get_to(c.kappa);
}

void to_json(json& j, const VmfnmParams& p) { j = json{{"components", p.components}}; }

void from_json(const json& j, VmfnmParams& p) { j.at("components").get_to(p.components); }

void to_json(json& j, const ChainState& s) { j = json{{"x", s.x}, {"g", number(s.g)}}; }

void to_json(json& j, const ChainRunRecord& r) {
  json chains = json::array();
  for (const Chain& c : r.chains) chains.push_back(c);
  json thresholds = json::array();
  for (double b : r.thresholds) thresholds.push_back(number(b));
  j = json{{"seed", r.seed},
           {"noise_index", r.noise_index},
           {"outcome", to_string(r.outcome)},
           {"produced_initial_sample", r.produced_initial_sample},
           {"thresholds", std::move(thresholds)},
           {"chains", std::move(chains)}};
}

void to_json(json& j, const NinitsTrace& t) {
  j = json{{"runs", t.runs},
           {"representatives", t.representatives},
           {"restarts", t.restarts},
           {"seed_evaluations", t.seed_evaluations},
           {"seed_midpoint_evaluations", t.seed_midpoint_evaluations},
           {"chain_candidate_evaluations", t.chain_candidate_evaluations},
           {"chain_midpoint_evaluations", t.chain_midpoint_evaluations}};
}

void to_json(json& j, const NisIteration& it) {
  j = json{{"iteration", it.iteration},
           {"refit", it.refit},
           {"batches", it.batches},
           {"p_hat", it.p_hat},
           {"delta_w", number(it.delta_w)},
           {"delta_is", number(it.delta_is)},
           {"effective_niches", it.effective_niches},
           {"budget", it.budget},
           {"chain_lengths", it.chain_lengths},
           {"alpha", it.alpha},
           {"components", it.components},
           {"em_iterations", it.em_iterations},
           {"evaluations", it.evaluations}};
}

void to_json(json& j, const RunRecord& r) {
  j = json{{"run", r.run},
           {"stream_id", r.stream_id},
           {"p_hat", r.p_hat},
           {"delta", number(r.delta)},
           {"g_evals", r.g_evals},
           {"converged", r.converged},
           {"stop_reason", r.stop_reason},
           {"initial_samples", r.initial_samples}};
}

void to_json(json& j, const SummaryTable& s) {
  j = json{{"model", s.model},
           {"dim", s.dim},
           {"estimator", s.estimator},
           {"repetitions", s.repetitions},
           {"converged_runs", s.converged_runs},
           {"excluded_runs", s.excluded_runs},
           {"mean_p_hat", number(s.mean_p_hat)},
           {"cov_p_hat", number(s.cov_p_hat)},
           {"mean_g_evals", s.mean_g_evals},
           {"reference", s.reference ? json(*s.reference) : json(nullptr)}};
}

json result_summary_json(const NisResult& result) {
  return json{{"p_hat", result.p_hat},
              {"delta_is", number(result.delta_is)},
              {"delta_w", number(result.delta_w)},
              {"effective_niches", result.effective_niches},
              {"converged", result.converged},
              {"stop_reason", result.stop_reason},
              {"evaluations", result.evaluations},
              {"initial_evaluations", result.initial.evaluations},
              {"initial_samples", result.initial.initial_samples},
              {"params", result.params},
              {"trace", result.trace}};
}

json figure_data_json(const NisResult& result) {
  json doc = result_summary_json(result);
  doc["initial_sampling"] = result.initial.trace;

  json chains = json::array();
  for (std::size_t k = 0; k < result.chains.size(); ++k) {
    json states = json::array();
    for (const ChainState& s : result.chains.chains[k]) states.push_back(s.x);
    chains.push_back(json{{"chain", k}, {"alpha", result.chains.alpha[k]}, {"states", std::move(states)}});
  }
  doc["chains"] = std::move(chains);

  json samples = json::array();
  for (std::size_t i = 0; i < result.importance_samples.size(); ++i) {
    const LabeledPoint& lp = result.importance_samples[i];
    samples.push_back(json{{"x", from_polar(lp.point)},
                           {"component", lp.component},
                           {"weight", result.importance_weights[i]}});
  }
  doc["importance_samples"] = std::move(samples);
  return doc;
}

}  // namespace nis
