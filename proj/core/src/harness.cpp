#include "nis/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "nis/serialization.hpp"

namespace nis {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size())
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" + value + "'");
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!value.empty() && value.front() != '-') v = std::stoull(value, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != 0 && used == value.size()) return v;
  // Counts such as mc_samples are often written as 1e8; accept any exact
  // integer in the range where doubles represent every integer.
  std::size_t fused = 0;
  double d = -1.0;
  try {
    d = std::stod(value, &fused);
  } catch (const std::exception&) {
    fused = 0;
  }
  if (fused != 0 && fused == value.size() && d >= 0.0 && d <= 0x1p53 && d == std::floor(d))
    return static_cast<std::uint64_t>(d);
  throw std::invalid_argument("config: '" + key + "' expects a non-negative integer, got '" +
                              value + "'");
}

std::vector<double> parse_noise_sequence(const std::string& value) {
  std::vector<double> out;
  if (value.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(parse_double("noise_sequence", trim(item)));
    if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0])
      throw std::invalid_argument("config: noise_sequence range must be start:step:stop");
    const auto count = static_cast<std::size_t>(std::llround((parts[2] - parts[0]) / parts[1])) + 1;
    for (std::size_t i = 0; i < count; ++i) out.push_back(parts[0] + parts[1] * static_cast<double>(i));
    return out;
  }
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double("noise_sequence", trim(item)));
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* estimator_name(Estimator e) { return e == Estimator::nis ? "nis" : "mc"; }

// Runs body(i) for i in [0, n) on up to `threads` workers. Exceptions are
// rethrown on the calling thread after all workers finish.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw std::invalid_argument("config: repetitions must be at least 1");
  if (estimator == Estimator::mc && mc_samples < 1)
    throw std::invalid_argument("config: mc_samples must be at least 1");
  (void)make_model(model, dim);
  nis.validate();
}

void apply_config_entry(ExperimentConfig& c, const std::string& key, const std::string& value) {
  auto as_size = [&] { return static_cast<std::size_t>(parse_unsigned(key, value)); };
  if (key == "model") {
    c.model = value;
  } else if (key == "dim") {
    c.dim = as_size();
  } else if (key == "estimator") {
    if (value == "nis") c.estimator = Estimator::nis;
    else if (value == "mc") c.estimator = Estimator::mc;
    else throw std::invalid_argument("config: estimator must be 'nis' or 'mc'");
  } else if (key == "repetitions") {
    c.repetitions = as_size();
  } else if (key == "seed") {
    c.seed = parse_unsigned(key, value);
  } else if (key == "threads") {
    c.threads = as_size();
  } else if (key == "mc_samples") {
    c.mc_samples = parse_unsigned(key, value);
  } else if (key == "reference") {
    c.reference = parse_double(key, value);
  } else if (key == "results") {
    c.outputs.results = value;
  } else if (key == "summary") {
    c.outputs.summary = value;
  } else if (key == "traces") {
    c.outputs.traces = value;
  } else if (key == "budget_multiplier") {
    c.nis.budget_multiplier = parse_double(key, value);
  } else if (key == "importance_sample_size") {
    c.nis.importance_sample_size = as_size();
  } else if (key == "weights_cov_target") {
    c.nis.weights_cov_target = parse_double(key, value);
  } else if (key == "estimator_cov_target") {
    c.nis.estimator_cov_target = parse_double(key, value);
  } else if (key == "proposal_scale") {
    c.nis.proposal_scale = parse_double(key, value);
    c.nis.ninits.proposal_scale = c.nis.proposal_scale;
  } else if (key == "max_iterations") {
    c.nis.max_iterations = as_size();
  } else if (key == "max_evaluations") {
    c.nis.max_evaluations = parse_unsigned(key, value);
  } else if (key == "level_probability") {
    c.nis.ninits.level_probability = parse_double(key, value);
  } else if (key == "noise_sequence") {
    c.nis.ninits.noise_sequence = parse_noise_sequence(value);
  } else if (key == "convergence_limit") {
    c.nis.ninits.convergence_limit = as_size();
  } else if (key == "length_limit") {
    c.nis.ninits.length_limit = as_size();
  } else if (key == "max_initial_samples") {
    c.nis.ninits.max_initial_samples = as_size();
  } else if (key == "restart_cap") {
    c.nis.ninits.restart_cap = as_size();
  } else if (key == "em_max_iterations") {
    c.nis.em.max_iterations = as_size();
  } else if (key == "em_tolerance") {
    c.nis.em.relative_tolerance = parse_double(key, value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
    apply_config_entry(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path.string() + "'");
  return parse_experiment_config(in);
}

// --- Monte Carlo ----------------------------------------------------------------

double mc_cov(double p_hat, std::uint64_t samples) {
  if (!(p_hat > 0.0)) return std::numeric_limits<double>::infinity();
  return std::sqrt((1.0 - p_hat) / (static_cast<double>(samples) * p_hat));
}

McResult mc_reference(const PerformanceModel& model, std::uint64_t samples, const RngStream& rng,
                      std::size_t threads) {
  if (samples < 1) throw std::invalid_argument("mc_reference: need at least one sample");
  constexpr std::uint64_t kBlock = 1'000'000;
  const std::uint64_t blocks = (samples + kBlock - 1) / kBlock;
  const std::size_t d = model.dim();
  std::vector<std::uint64_t> hits(blocks, 0);
  parallel_for(static_cast<std::size_t>(blocks), threads, [&](std::size_t b) {
    RngStream block_rng = rng.split(b);
    const std::uint64_t begin = b * kBlock;
    const std::uint64_t end = std::min(samples, begin + kBlock);
    Vector x(d);
    std::uint64_t count = 0;
    for (std::uint64_t i = begin; i < end; ++i) {
      for (double& v : x) v = block_rng.normal();
      if (model.is_failure(x)) ++count;
    }
    hits[b] = count;
  });
  McResult out;
  out.samples = samples;
  for (auto h : hits) out.failures += h;
  out.p_hat = static_cast<double>(out.failures) / static_cast<double>(samples);
  out.cov = mc_cov(out.p_hat, samples);
  return out;
}

// --- experiments ------------------------------------------------------------------

SummaryTable summarize(const std::vector<RunRecord>& records, const std::string& model,
                       std::size_t dim, const std::string& estimator,
                       std::optional<double> reference) {
  SummaryTable s;
  s.model = model;
  s.dim = dim;
  s.estimator = estimator;
  s.repetitions = records.size();
  s.reference = reference;

  double evals = 0.0;
  double sum = 0.0;
  for (const RunRecord& r : records) {
    evals += static_cast<double>(r.g_evals);
    if (!r.converged) continue;
    ++s.converged_runs;
    sum += r.p_hat;
  }
  s.excluded_runs = s.repetitions - s.converged_runs;
  s.mean_g_evals = records.empty() ? 0.0 : evals / static_cast<double>(records.size());
  if (s.converged_runs == 0) {
    s.mean_p_hat = std::numeric_limits<double>::quiet_NaN();
    s.cov_p_hat = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  const double n = static_cast<double>(s.converged_runs);
  s.mean_p_hat = sum / n;
  if (s.converged_runs == 1) {
    s.cov_p_hat = 0.0;
    return s;
  }
  double ss = 0.0;
  for (const RunRecord& r : records)
    if (r.converged) ss += (r.p_hat - s.mean_p_hat) * (r.p_hat - s.mean_p_hat);
  s.cov_p_hat = std::sqrt(ss / (n - 1.0)) / s.mean_p_hat;
  return s;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const ModelPtr model = make_model(config.model, config.dim);
  const RngStream master(config.seed);
  const bool keep_traces = !config.outputs.traces.empty() && config.estimator == Estimator::nis;

  ExperimentResult result;
  result.records.resize(config.repetitions);
  if (keep_traces) result.traces.resize(config.repetitions);

  parallel_for(config.repetitions, config.threads, [&](std::size_t i) {
    const RngStream stream = master.split(i);
    RunRecord& rec = result.records[i];
    rec.run = i;
    rec.stream_id = stream.stream_id();
    const auto start = std::chrono::steady_clock::now();
    if (config.estimator == Estimator::nis) {
      CountedModel counted(model);
      try {
        NisResult r = nis_run(counted, config.nis, stream);
        rec.p_hat = r.p_hat;
        rec.delta = r.delta_is;
        rec.converged = r.converged;
        rec.stop_reason = r.stop_reason;
        rec.initial_samples = r.initial.initial_samples.size();
        if (keep_traces) result.traces[i] = std::move(r.trace);
      } catch (const NinitsError&) {
        rec.p_hat = 0.0;
        rec.delta = std::numeric_limits<double>::infinity();
        rec.converged = false;
        rec.stop_reason = "initial_sampling_failed";
      }
      rec.g_evals = counted.evaluations();
    } else {
      const McResult mc = mc_reference(*model, config.mc_samples, stream, 1);
      rec.p_hat = mc.p_hat;
      rec.delta = mc.cov;
      rec.converged = true;
      rec.stop_reason = "complete";
      rec.g_evals = mc.samples;
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  result.summary = summarize(result.records, config.model, model->dim(),
                             estimator_name(config.estimator), config.reference);
  return result;
}

// --- outputs ----------------------------------------------------------------------

void write_results_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "run,stream_id,p_hat,delta,g_evals,converged,stop_reason,initial_samples\n";
  for (const RunRecord& r : records) {
    out << r.run << ',' << r.stream_id << ',' << format_double(r.p_hat) << ','
        << format_double(r.delta) << ',' << r.g_evals << ',' << (r.converged ? 1 : 0) << ','
        << r.stop_reason << ',' << r.initial_samples << '\n';
  }
}

std::vector<RunRecord> read_results_csv(std::istream& in) {
  std::vector<RunRecord> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 8) throw std::runtime_error("results csv: expected 8 fields in '" + line + "'");
    RunRecord r;
    r.run = static_cast<std::size_t>(std::stoull(f[0]));
    r.stream_id = std::stoull(f[1]);
    r.p_hat = std::strtod(f[2].c_str(), nullptr);
    r.delta = std::strtod(f[3].c_str(), nullptr);
    r.g_evals = std::stoull(f[4]);
    r.converged = f[5] == "1";
    r.stop_reason = f[6];
    r.initial_samples = static_cast<std::size_t>(std::stoull(f[7]));
    out.push_back(std::move(r));
  }
  return out;
}

void write_summary_csv(std::ostream& out, const SummaryTable& s) {
  out << "model,dim,estimator,repetitions,converged_runs,excluded_runs,mean_p_hat,cov_p_hat,"
         "mean_g_evals,reference\n";
  out << s.model << ',' << s.dim << ',' << s.estimator << ',' << s.repetitions << ','
      << s.converged_runs << ',' << s.excluded_runs << ',' << format_double(s.mean_p_hat) << ','
      << format_double(s.cov_p_hat) << ',' << format_double(s.mean_g_evals) << ','
      << (s.reference ? format_double(*s.reference) : std::string()) << '\n';
}

void emit_outputs(const ExperimentResult& result, const OutputPaths& paths) {
  if (!paths.results.empty()) {
    auto out = open_output(paths.results);
    write_results_csv(out, result.records);
  }
  if (!paths.summary.empty()) {
    auto out = open_output(paths.summary);
    write_summary_csv(out, result.summary);
  }
  if (!paths.traces.empty()) {
    nlohmann::json doc = nlohmann::json::array();
    for (std::size_t i = 0; i < result.traces.size(); ++i)
      doc.push_back({{"run", i}, {"trace", result.traces[i]}});
    auto out = open_output(paths.traces);
    out << doc.dump() << '\n';
  }
}

std::string dump_figure_data(const std::string& model, std::size_t dim, std::uint64_t seed,
                             const NisConfig& config) {
  CountedModel counted(make_model(model, dim));
  const NisResult result = nis_run(counted, config, RngStream(seed));
  nlohmann::json doc = figure_data_json(result);
  doc["model"] = model;
  doc["dim"] = counted.dim();
  doc["seed"] = seed;
  return doc.dump();
}

}  // namespace nis
