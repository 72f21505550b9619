// Command line front end: experiment runs, Monte Carlo references and
// figure-data dumps.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "nis/harness.hpp"
#include "nis/performance_models.hpp"

namespace {

void print_summary(const nis::SummaryTable& s) {
  std::printf("model            %s (d = %zu)\n", s.model.c_str(), s.dim);
  std::printf("estimator        %s\n", s.estimator.c_str());
  std::printf("runs             %zu (%zu converged, %zu excluded)\n", s.repetitions,
              s.converged_runs, s.excluded_runs);
  std::printf("mean p_hat       %.6e\n", s.mean_p_hat);
  std::printf("cov p_hat        %.4f\n", s.cov_p_hat);
  std::printf("mean g evals     %.1f\n", s.mean_g_evals);
  if (s.reference) std::printf("reference        %.6e\n", *s.reference);
}

std::uint64_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 1.8e19)
    throw CLI::ValidationError(what, "must be a positive integer");
  return static_cast<std::uint64_t>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Failure probability estimation with adaptive mixture importance sampling"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
  std::string config_path;
  std::optional<std::size_t> run_threads;
  run->add_option("config", config_path, "Experiment config (key = value lines)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--threads", run_threads, "Override the worker thread count (0 = all cores)");

  // reference
  auto* ref = app.add_subcommand("reference", "Crude Monte Carlo reference probability");
  std::string ref_model = "pwl";
  std::size_t ref_dim = 0;
  double ref_samples = 1e6;
  std::uint64_t ref_seed = 1;
  std::size_t ref_threads = 1;
  ref->add_option("--model", ref_model, "Model name")->check(CLI::IsMember(nis::registered_models()));
  ref->add_option("--dim", ref_dim, "Lifted dimension (0 = native)");
  ref->add_option("--samples", ref_samples, "Number of samples (e.g. 1e8)");
  ref->add_option("--seed", ref_seed, "Master seed");
  ref->add_option("--threads", ref_threads, "Worker threads (0 = all cores)");

  // dump-figure-data
  auto* dump = app.add_subcommand("dump-figure-data", "Single seeded run with full trace as JSON");
  std::string dump_config;
  std::optional<std::string> dump_model;
  std::optional<std::size_t> dump_dim;
  std::optional<std::uint64_t> dump_seed;
  std::string dump_out;
  dump->add_option("--config", dump_config, "Config file supplying algorithm settings")
      ->check(CLI::ExistingFile);
  dump->add_option("--model", dump_model, "Model name");
  dump->add_option("--dim", dump_dim, "Lifted dimension (0 = native)");
  dump->add_option("--seed", dump_seed, "Seed");
  dump->add_option("--out", dump_out, "Output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      nis::ExperimentConfig cfg = nis::load_experiment_config(config_path);
      if (run_threads) cfg.threads = *run_threads;
      const nis::ExperimentResult result = nis::run_experiment(cfg);
      nis::emit_outputs(result, cfg.outputs);
      print_summary(result.summary);
      if (!cfg.outputs.results.empty())
        std::printf("results          %s\n", cfg.outputs.results.string().c_str());
      if (!cfg.outputs.summary.empty())
        std::printf("summary          %s\n", cfg.outputs.summary.string().c_str());
    } else if (*ref) {
      const nis::ModelPtr model = nis::make_model(ref_model, ref_dim);
      const std::uint64_t n = as_count(ref_samples, "--samples");
      const nis::McResult mc = nis::mc_reference(*model, n, nis::RngStream(ref_seed), ref_threads);
      std::printf("model     %s (d = %zu)\n", model->name().c_str(), model->dim());
      std::printf("samples   %llu\n", static_cast<unsigned long long>(mc.samples));
      std::printf("failures  %llu\n", static_cast<unsigned long long>(mc.failures));
      std::printf("p_hat     %.6e\n", mc.p_hat);
      std::printf("cov       %.4f\n", mc.cov);
    } else if (*dump) {
      nis::ExperimentConfig cfg;
      if (!dump_config.empty()) cfg = nis::load_experiment_config(dump_config);
      if (dump_model) cfg.model = *dump_model;
      if (dump_dim) cfg.dim = *dump_dim;
      if (dump_seed) cfg.seed = *dump_seed;
      const std::string doc = nis::dump_figure_data(cfg.model, cfg.dim, cfg.seed, cfg.nis);
      if (dump_out.empty()) {
        std::cout << doc << '\n';
      } else {
        std::ofstream out(dump_out);
        if (!out) throw std::runtime_error("cannot open '" + dump_out + "'");
        out << doc << '\n';
        std::fprintf(stderr, "wrote %s\n", dump_out.c_str());
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
