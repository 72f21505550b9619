#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nis/nis.hpp"
#include "nis/performance_models.hpp"
#include "nis/rng.hpp"

namespace nis {

enum class Estimator { nis, mc };

struct OutputPaths {
  std::filesystem::path results;  // one CSV row per run
  std::filesystem::path summary;  // one-row CSV
  std::filesystem::path traces;   // JSON, per-run iteration traces (optional)
};

struct ExperimentConfig {
  std::string model = "pwl";
  /// 0 keeps the model's native dimension.
  std::size_t dim = 0;
  Estimator estimator = Estimator::nis;
  std::size_t repetitions = 100;
  std::uint64_t seed = 1;
  /// Worker threads for repetitions; 0 uses the hardware concurrency.
  std::size_t threads = 1;
  /// Samples per repetition when estimator = mc.
  std::uint64_t mc_samples = 1'000'000;
  /// Reference probability for the summary, if known.
  std::optional<double> reference;
  NisConfig nis;
  OutputPaths outputs;

  void validate() const;
};

/// Parses a flat "key = value" file. Blank lines and '#' comments are
/// ignored; unknown keys and malformed values throw std::invalid_argument.
///
/// Keys: model, dim, estimator (nis|mc), repetitions, seed, threads,
/// mc_samples, reference, results, summary, traces, and the algorithm
/// settings budget_multiplier, importance_sample_size, weights_cov_target,
/// estimator_cov_target, proposal_scale, max_iterations, max_evaluations,
/// level_probability, noise_sequence (comma list or start:step:stop),
/// convergence_limit, length_limit, max_initial_samples, restart_cap,
/// em_max_iterations, em_tolerance.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Applies one key/value pair; the same rules as the file parser.
void apply_config_entry(ExperimentConfig& config, const std::string& key, const std::string& value);

struct McResult {
  double p_hat = 0.0;
  double cov = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t failures = 0;
};

/// Crude Monte Carlo with `samples` standard normal draws. Work is split
/// into fixed blocks, block b drawing from rng.split(b), so the answer does
/// not depend on `threads`.
McResult mc_reference(const PerformanceModel& model, std::uint64_t samples, const RngStream& rng,
                      std::size_t threads = 1);

/// sqrt((1 - p) / (n p)), +inf when p = 0.
double mc_cov(double p_hat, std::uint64_t samples);

struct RunRecord {
  std::size_t run = 0;
  /// Stream id under the master seed; RngStream(seed, stream_id) replays the run.
  std::uint64_t stream_id = 0;
  double p_hat = 0.0;
  double delta = 0.0;
  std::uint64_t g_evals = 0;
  bool converged = false;
  std::string stop_reason;
  std::size_t initial_samples = 0;
  double wall_seconds = 0.0;
};

struct SummaryTable {
  std::string model;
  std::size_t dim = 0;
  std::string estimator;
  std::size_t repetitions = 0;
  std::size_t converged_runs = 0;
  std::size_t excluded_runs = 0;
  double mean_p_hat = 0.0;
  double cov_p_hat = 0.0;
  double mean_g_evals = 0.0;
  std::optional<double> reference;
};

/// Mean and CoV over converged runs only; mean evaluations over all runs.
/// The CoV uses the (R - 1) variance and is 0 for a single run.
SummaryTable summarize(const std::vector<RunRecord>& records, const std::string& model,
                       std::size_t dim, const std::string& estimator,
                       std::optional<double> reference);

struct ExperimentResult {
  std::vector<RunRecord> records;
  SummaryTable summary;
  /// Per-run NIS iteration traces, filled only when a traces path is set.
  std::vector<std::vector<NisIteration>> traces;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes results and summary CSVs (and traces JSON when requested).
/// Missing parent directories are created.
void emit_outputs(const ExperimentResult& result, const OutputPaths& paths);

void write_results_csv(std::ostream& out, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_results_csv(std::istream& in);
void write_summary_csv(std::ostream& out, const SummaryTable& summary);

/// A single seeded NIS run with its full trace, as a JSON document holding
/// the initial-sampling chain runs, the final Markov chains and the final
/// importance samples with component labels and weights.
std::string dump_figure_data(const std::string& model, std::size_t dim, std::uint64_t seed,
                             const NisConfig& config = {});

}  // namespace nis
