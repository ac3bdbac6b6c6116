// ragda: run solver experiments and numerical verification suites.
//
//   ragda run --preset robust-mle-ragda --seed 7 --out runs/
//   ragda verify --suite gradients --problem robust-mle --d 5 --n 20

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ragda/harness/experiment.hpp"
#include "ragda/verification/suites.hpp"

#ifndef RAGDA_PRESET_DIR
#define RAGDA_PRESET_DIR "presets"
#endif

namespace {

using namespace ragda;

constexpr int kConfigExit = 2;

std::filesystem::path preset_dir() {
  if (const char* env = std::getenv("RAGDA_PRESET_DIR"); env != nullptr && *env != '\0') return env;
  return RAGDA_PRESET_DIR;
}

struct RunFlags {
  std::string preset;
  // Flag name -> config key. Values are kept as text and applied through
  // the same parser as preset files.
  std::vector<std::pair<std::string, std::string>> mapping = {
      {"problem", "problem"},       {"solver", "solver"},       {"alpha", "alpha"},
      {"beta", "beta"},             {"eta-x", "eta_x"},         {"eta-y", "eta_y"},
      {"v0-x", "v0_x"},             {"v0-y", "v0_y"},           {"max-iters", "max_iters"},
      {"grad-tol", "grad_tol"},     {"batch-size", "batch_size"}, {"seed", "seed"},
      {"repeats", "repeats"},       {"jobs", "jobs"},           {"eval-stride", "eval_stride"},
      {"out", "out"},               {"d", "d"},                 {"n", "n"},
      {"c", "c"},                   {"data-seed", "data_seed"}, {"sigma", "sigma"},
      {"instance", "instance_file"}, {"max-records", "max_records"}};
  std::map<std::string, std::string> values;
};

int do_run(const RunFlags& flags, const CLI::App& cmd) {
  harness::ExperimentConfig cfg;
  if (!flags.preset.empty()) harness::load_preset(cfg, flags.preset, preset_dir());
  for (const auto& [flag, key] : flags.mapping) {
    if (cmd.count("--" + flag) == 0) continue;
    apply_key(cfg, key, KvEntry{flags.values.at(flag), "--" + flag, 0});
  }
  if (const char* env = std::getenv("RM_SEED"); env != nullptr && *env != '\0')
    apply_key(cfg, "seed", KvEntry{env, "RM_SEED", 0});

  const auto result = harness::run_experiment(cfg);
  for (const auto& r : result.repeats) {
    std::cout << "repeat " << r.index << " seed=" << r.seed << " stop=" << to_string(r.trace.stop_reason)
              << " iterations=" << r.trace.iterations
              << " min_stationarity=" << format_double(r.trace.min_stationarity) << " -> " << r.csv.string()
              << "\n";
    if (!r.trace.error.empty()) std::cerr << "repeat " << r.index << ": " << r.trace.error << "\n";
  }
  std::cout << "summary -> " << result.summary.string() << "\n";
  return result.exit_code();
}

struct VerifyFlags {
  std::string suite = "all";
  std::string problem = "all";
  Index d = 5;
  Index n = 20;
  int budget_decades = 2;
  std::string out;
};

int do_verify(const VerifyFlags& f) {
  using namespace ragda::verify;
  const std::vector<std::string> known = {"geometry", "gradients", "rates", "stochastic",
                                          "identity", "lemma",     "reproduction"};
  std::vector<std::string> selected;
  if (f.suite == "all") selected = known;
  else if (std::find(known.begin(), known.end(), f.suite) != known.end()) selected = {f.suite};
  else fail(ErrorCode::ConfigError, "--suite: unknown suite '" + f.suite + "'");
  if (f.problem != "all" && f.problem != "robust-mle" && f.problem != "synthetic-quadratic")
    fail(ErrorCode::ConfigError, "--problem: unknown problem '" + f.problem + "'");
  if (f.budget_decades < 2) fail(ErrorCode::ConfigError, "--budget-decades must be >= 2");

  std::vector<SuiteReport> reports;
  for (const auto& name : selected) {
    if (name == "geometry") reports.push_back(geometry_suite());
    if (name == "gradients") {
      GradientSuiteOptions opt;
      opt.robust_mle = f.problem != "synthetic-quadratic";
      opt.synthetic = f.problem != "robust-mle";
      opt.d = f.d;
      opt.n = f.n;
      reports.push_back(gradient_suite(opt));
    }
    if (name == "rates") {
      RateSuiteOptions opt;
      opt.decades = f.budget_decades;
      reports.push_back(rate_suite(opt));
    }
    if (name == "stochastic") reports.push_back(stochastic_suite());
    if (name == "identity") reports.push_back(identity_suite());
    if (name == "lemma") reports.push_back(lemma_suite());
    if (name == "reproduction") reports.push_back(reproduction_suite());
    std::cout << format_table(reports.back()) << std::flush;
  }

  if (!f.out.empty()) {
    std::ofstream out(f.out);
    for (const auto& r : reports) out << format_report(r);
    if (!out) fail(ErrorCode::IoError, "cannot write " + f.out);
  }
  const bool ok = std::all_of(reports.begin(), reports.end(), [](const SuiteReport& r) { return r.passed(); });
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive Riemannian minimax solvers: experiments and verification"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Run a solver experiment and write CSV traces");
  run_cmd->add_option("--preset", run_flags.preset, "Preset name or path to a preset file");
  for (const auto& [flag, key] : run_flags.mapping) run_cmd->add_option("--" + flag, run_flags.values[flag]);

  VerifyFlags verify_flags;
  auto* verify_cmd = app.add_subcommand("verify", "Run numerical verification suites");
  verify_cmd->add_option("--suite", verify_flags.suite,
                         "geometry|gradients|rates|stochastic|identity|lemma|reproduction|all");
  verify_cmd->add_option("--problem", verify_flags.problem, "robust-mle|synthetic-quadratic|all");
  verify_cmd->add_option("--d", verify_flags.d, "robust-mle dimension for the gradient suite");
  verify_cmd->add_option("--n", verify_flags.n, "robust-mle sample count for the gradient suite");
  verify_cmd->add_option("--budget-decades", verify_flags.budget_decades, "Decades of budgets above T=100");
  verify_cmd->add_option("--out", verify_flags.out, "Also write the reports as key=value text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (run_cmd->parsed()) return do_run(run_flags, *run_cmd);
    return do_verify(verify_flags);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::NumericalError ? 3 : kConfigExit;
  }
}
