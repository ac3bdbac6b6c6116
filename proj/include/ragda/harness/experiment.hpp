#pragma once

// Experiment plumbing behind the `ragda` command line: presets, problem
// construction, concurrent repeats, CSV traces and key=value summaries.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ragda/error.hpp"
#include "ragda/format.hpp"
#include "ragda/instance_io.hpp"
#include "ragda/problems.hpp"
#include "ragda/serialize.hpp"
#include "ragda/solvers.hpp"

namespace ragda::harness {

enum class ProblemKind { RobustMle, SyntheticQuadratic };

inline std::string_view to_string(ProblemKind k) {
  return k == ProblemKind::RobustMle ? "robust-mle" : "synthetic-quadratic";
}

inline ProblemKind parse_problem(const KvEntry& e) {
  if (e.value == "robust-mle") return ProblemKind::RobustMle;
  if (e.value == "synthetic-quadratic") return ProblemKind::SyntheticQuadratic;
  fail(ErrorCode::ConfigError, e.where() + ": unknown problem '" + e.value +
                                   "' (expected robust-mle or synthetic-quadratic)");
}

struct ProblemParams {
  // robust-mle
  Index d = 30;
  Index n = 100;
  double c = -5.0;
  /// Binary (.bin) or seed-text instance file; overrides d, n, c when set.
  std::string instance_file;
  // synthetic-quadratic
  Index k = 20;
  Index m = 10;
  double mu = 1.0;
  double sigma = 0.1;
  double spectrum_decades = 2.0;
  /// Seed of the problem data, held fixed across repeats.
  std::uint64_t data_seed = 2025;
};

struct ExperimentConfig {
  std::string name = "run";
  ProblemKind problem = ProblemKind::RobustMle;
  ProblemParams params;
  SolverConfig solver;
  int repeats = 1;
  int jobs = 1;
  std::filesystem::path out_path = "runs";
};

/// Applies one `key = value` setting; shared by preset files and flags.
inline void apply_key(ExperimentConfig& cfg, const std::string& key, const KvEntry& e) {
  auto& s = cfg.solver;
  auto& p = cfg.params;
  auto positive_index = [&]() {
    const auto v = parse_int(e);
    if (v < 1) fail(ErrorCode::ConfigError, e.where() + ": " + key + " must be >= 1");
    return static_cast<Index>(v);
  };
  auto seed = [&]() {
    const auto v = parse_int(e);
    if (v < 0) fail(ErrorCode::ConfigError, e.where() + ": " + key + " must be >= 0");
    return static_cast<std::uint64_t>(v);
  };

  if (key == "name") cfg.name = e.value;
  else if (key == "problem") cfg.problem = parse_problem(e);
  else if (key == "solver") {
    try {
      s.method = parse_method(e.value);
    } catch (const Error&) {
      fail(ErrorCode::ConfigError, e.where() + ": unknown solver '" + e.value + "'");
    }
  }
  else if (key == "alpha") s.alpha = parse_real(e);
  else if (key == "beta") s.beta = parse_real(e);
  else if (key == "eta_x") s.eta_x = parse_real(e);
  else if (key == "eta_y") s.eta_y = parse_real(e);
  else if (key == "v0_x") s.v0_x = parse_real(e);
  else if (key == "v0_y") s.v0_y = parse_real(e);
  else if (key == "v0") s.v0_x = s.v0_y = parse_real(e);
  else if (key == "max_iters") s.max_iters = parse_int(e);
  else if (key == "grad_tol") s.grad_tol = parse_real(e);
  else if (key == "batch_size") s.batch_size = positive_index();
  else if (key == "seed") s.seed = seed();
  else if (key == "eval_stride") s.eval_stride = parse_int(e);
  else if (key == "max_records") s.max_records = parse_int(e);
  else if (key == "track_inner_max") s.track_inner_max = parse_bool(e);
  else if (key == "repeats") cfg.repeats = static_cast<int>(positive_index());
  else if (key == "jobs") cfg.jobs = static_cast<int>(positive_index());
  else if (key == "out") cfg.out_path = e.value;
  else if (key == "d") p.d = positive_index();
  else if (key == "n") p.n = positive_index();
  else if (key == "c") p.c = parse_real(e);
  else if (key == "instance_file") p.instance_file = e.value;
  else if (key == "k") p.k = positive_index();
  else if (key == "m") p.m = positive_index();
  else if (key == "mu") p.mu = parse_real(e);
  else if (key == "sigma") p.sigma = parse_real(e);
  else if (key == "spectrum_decades") p.spectrum_decades = parse_real(e);
  else if (key == "data_seed") p.data_seed = seed();
  else fail(ErrorCode::ConfigError, e.where() + ": unknown key '" + key + "'");
}

inline void apply_stream(ExperimentConfig& cfg, std::istream& in, const std::string& source) {
  for (const auto& [key, entry] : parse_key_values(in, source)) apply_key(cfg, key, entry);
}

/// `name` is either a path to a preset file or a preset name looked up as
/// `<dir>/<name>.cfg`.
inline std::filesystem::path resolve_preset(const std::string& name, const std::filesystem::path& dir) {
  const std::filesystem::path direct(name);
  if (std::filesystem::is_regular_file(direct)) return direct;
  const auto candidate = dir / (name + ".cfg");
  if (std::filesystem::is_regular_file(candidate)) return candidate;
  fail(ErrorCode::ConfigError, "--preset: no preset '" + name + "' (looked in " + dir.string() + ")");
}

inline void load_preset(ExperimentConfig& cfg, const std::string& name, const std::filesystem::path& dir) {
  const auto path = resolve_preset(name, dir);
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ConfigError, "cannot read preset " + path.string());
  cfg.name = path.stem().string();
  apply_stream(cfg, in, path.string());
}

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.repeats < 1) fail(ErrorCode::ConfigError, "repeats must be >= 1");
  if (cfg.jobs < 1) fail(ErrorCode::ConfigError, "jobs must be >= 1");
  if (cfg.out_path.empty()) fail(ErrorCode::ConfigError, "out path must be non-empty");
  validate(cfg.solver);
}

inline std::unique_ptr<MinimaxProblem> build_problem(const ExperimentConfig& cfg) {
  const auto& p = cfg.params;
  try {
    if (cfg.problem == ProblemKind::SyntheticQuadratic)
      return std::make_unique<SyntheticQuadratic>(
          generate_synthetic_quadratic(p.k, p.m, p.mu, p.sigma, p.data_seed, p.spectrum_decades));
    if (!p.instance_file.empty()) {
      std::ifstream in(p.instance_file, std::ios::binary);
      if (!in) fail(ErrorCode::ConfigError, "cannot read instance file " + p.instance_file);
      if (std::filesystem::path(p.instance_file).extension() == ".bin")
        return std::make_unique<RobustMleProblem>(read_instance_binary(in));
      return std::make_unique<RobustMleProblem>(instantiate(read_instance_text(in)));
    }
    return std::make_unique<RobustMleProblem>(generate_gaussian_instance(p.d, p.n, p.c, p.data_seed));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(ErrorCode::ConfigError, std::string("problem setup: ") + e.what());
  }
}

/// Seed of repeat `index`: the configured seed itself for repeat 0, then
/// seeds drawn from a seed sequence over (seed, index).
inline std::uint64_t repeat_seed(std::uint64_t seed, int index) {
  if (index == 0) return seed;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), 0x72657065u};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

// ---------------------------------------------------------------------------

inline constexpr std::string_view kTraceHeader = "iter,wall_s,grad_x_norm,grad_y_norm,eta_t,gamma_t,f_value";

inline void write_trace_csv(std::ostream& out, const std::vector<IterationRecord>& records) {
  out << kTraceHeader << "\n";
  for (const auto& r : records) {
    out << r.t << ',' << format_double(r.wall_s) << ',' << format_double(r.grad_x_norm) << ','
        << format_double(r.grad_y_norm) << ',' << format_double(r.eta_t) << ',' << format_double(r.gamma_t)
        << ',' << format_double(r.f_value) << "\n";
  }
}

/// Drops one named column from a CSV text; used to compare traces with the
/// wall-clock column removed.
inline std::string drop_csv_column(const std::string& csv, const std::string& column) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  long drop = -1;
  bool header = true;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (header) {
      const auto it = std::find(cells.begin(), cells.end(), column);
      if (it != cells.end()) drop = it - cells.begin();
      header = false;
    }
    bool first = true;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (static_cast<long>(i) == drop) continue;
      out << (first ? "" : ",") << cells[i];
      first = false;
    }
    out << "\n";
  }
  return out.str();
}

struct RepeatResult {
  int index = 0;
  std::uint64_t seed = 0;
  Trace trace;
  double wall_s = 0.0;
  std::filesystem::path csv;
  std::filesystem::path final_point;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string problem_name;
  std::vector<RepeatResult> repeats;
  std::filesystem::path summary;

  bool any_numerical_error() const {
    return std::any_of(repeats.begin(), repeats.end(),
                       [](const RepeatResult& r) { return r.trace.stop_reason == StopReason::NumericalError; });
  }
  /// 0 on success, 3 when any repeat stopped with NumericalError.
  int exit_code() const { return any_numerical_error() ? 3 : 0; }
};

inline std::string summary_text(const ExperimentResult& result) {
  const auto& cfg = result.config;
  std::ostringstream out;
  double best = std::numeric_limits<double>::infinity();
  std::int64_t calls = 0;
  for (const auto& r : result.repeats) {
    best = std::min(best, r.trace.min_stationarity);
    calls += r.trace.oracle_calls;
  }
  const auto& flags = regime_flags(cfg.solver);
  std::string joined;
  for (const auto& f : flags) joined += (joined.empty() ? "" : "; ") + f;

  out << "name=" << cfg.name << "\n";
  out << "problem=" << result.problem_name << "\n";
  out << "solver=" << to_string(cfg.solver.method) << "\n";
  out << "eta_x=" << format_double(cfg.solver.eta_x) << "\n";
  out << "eta_y=" << format_double(cfg.solver.eta_y) << "\n";
  if (is_adaptive(cfg.solver.method)) {
    out << "alpha=" << format_double(cfg.solver.alpha) << "\n";
    out << "beta=" << format_double(cfg.solver.beta) << "\n";
    out << "v0_x=" << format_double(cfg.solver.v0_x) << "\n";
    out << "v0_y=" << format_double(cfg.solver.v0_y) << "\n";
  }
  out << "max_iters=" << cfg.solver.max_iters << "\n";
  out << "seed=" << cfg.solver.seed << "\n";
  out << "repeats=" << cfg.repeats << "\n";
  out << "min_stationarity=" << format_double(best) << "\n";
  out << "stop_reason=" << (result.any_numerical_error() ? "NumericalError"
                                                          : to_string(result.repeats.front().trace.stop_reason))
      << "\n";
  out << "oracle_calls=" << calls << "\n";
  out << "regime_flags=" << (joined.empty() ? "none" : joined) << "\n";
  for (const auto& r : result.repeats) {
    const std::string key = "repeat." + std::to_string(r.index);
    out << key << ".seed=" << r.seed << "\n";
    out << key << ".min_stationarity=" << format_double(r.trace.min_stationarity) << "\n";
    out << key << ".stop_reason=" << to_string(r.trace.stop_reason) << "\n";
    out << key << ".iterations=" << r.trace.iterations << "\n";
    out << key << ".oracle_calls=" << r.trace.oracle_calls << "\n";
    out << key << ".max_grad_norm=" << format_double(r.trace.max_grad_norm) << "\n";
    out << key << ".clamp_events=" << r.trace.clamp_events << "\n";
    out << key << ".wall_s=" << format_double(r.wall_s) << "\n";
    out << key << ".csv=" << r.csv.filename().string() << "\n";
    if (!r.trace.error.empty()) out << key << ".error=" << r.trace.error << "\n";
  }
  return out.str();
}

inline std::filesystem::path trace_path(const ExperimentConfig& cfg, int index) {
  return cfg.out_path / (cfg.name + "_r" + std::to_string(index) + ".csv");
}

/// Runs every repeat (concurrently, up to `jobs` at a time) and writes
/// `<name>_r<i>.csv`, `<name>_r<i>_final.bin` and `<name>_summary.txt`
/// under `out_path`.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto problem = build_problem(cfg);
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_path, ec);
  if (ec || !std::filesystem::is_directory(cfg.out_path))
    fail(ErrorCode::ConfigError, "--out: cannot create directory " + cfg.out_path.string());

  ExperimentResult result;
  result.config = cfg;
  result.problem_name = problem->name();
  result.repeats.resize(static_cast<std::size_t>(cfg.repeats));

  std::atomic<int> next{0};
  std::vector<std::string> io_errors(result.repeats.size());
  auto worker = [&]() {
    for (int i = next++; i < cfg.repeats; i = next++) {
      auto& slot = result.repeats[static_cast<std::size_t>(i)];
      slot.index = i;
      slot.seed = repeat_seed(cfg.solver.seed, i);
      SolverConfig solver = cfg.solver;
      solver.seed = slot.seed;
      const auto start = std::chrono::steady_clock::now();
      slot.trace = run(*problem, solver);
      slot.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

      slot.csv = trace_path(cfg, i);
      std::ofstream csv(slot.csv);
      write_trace_csv(csv, slot.trace.records);
      slot.final_point = cfg.out_path / (cfg.name + "_r" + std::to_string(i) + "_final.bin");
      std::ofstream bin(slot.final_point, std::ios::binary);
      write_point(bin, problem->mx(), slot.trace.final_state.x);
      write_point(bin, problem->my(), slot.trace.final_state.y);
      if (!csv || !bin) io_errors[static_cast<std::size_t>(i)] = "cannot write outputs of repeat " + std::to_string(i);
    }
  };
  const int threads = std::min(cfg.jobs, cfg.repeats);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < threads; ++j) pool.emplace_back(worker);
  }
  for (const auto& msg : io_errors)
    if (!msg.empty()) fail(ErrorCode::IoError, msg);

  result.summary = cfg.out_path / (cfg.name + "_summary.txt");
  std::ofstream summary(result.summary);
  summary << summary_text(result);
  if (!summary) fail(ErrorCode::IoError, "cannot write " + result.summary.string());
  return result;
}

}  // namespace ragda::harness
