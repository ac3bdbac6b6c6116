#pragma once

// Batteries of numerical checks, each producing a table of measured values
// against thresholds. Used by `ragda verify` and the acceptance tests.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ragda/format.hpp"
#include "ragda/manifold.hpp"
#include "ragda/problems.hpp"
#include "ragda/solvers.hpp"
#include "ragda/verification/oracles.hpp"

namespace ragda::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  // "<=", ">=", "==", "in"
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }
  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

inline CheckResult at_most(std::string name, double value, double threshold, std::string detail = {}) {
  return {std::move(name), value <= threshold, value, threshold, "<=", std::move(detail)};
}

inline CheckResult at_least(std::string name, double value, double threshold, std::string detail = {}) {
  return {std::move(name), value >= threshold, value, threshold, ">=", std::move(detail)};
}

/// Recorded for information only; never fails the suite.
inline CheckResult report_only(std::string name, double value, std::string detail = {}) {
  return {std::move(name), true, value, 0.0, "info", std::move(detail)};
}

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline double relative(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  return (got - want).norm() / std::max(1.0, want.norm());
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct GeometrySuiteOptions {
  int pairs = 500;
  int transport_trials = 200;
  int retraction_trials = 50;
  std::uint64_t seed = 2024;
  double roundtrip_tol = 1e-8;
  double isometry_tol = 1e-8;
  double slope_lo = 1.9;
  double slope_hi = 2.5;
  double cbar_max = 2.0;
  double cr_exact_max = 1e-10;
};

inline SuiteReport geometry_suite(const GeometrySuiteOptions& opt = {}) {
  detail::Stopwatch clock;
  SuiteReport report{"geometry", {}, 0.0};
  const std::vector<ManifoldSpec> roundtrip_specs = {
      ManifoldSpec::sphere(3),   ManifoldSpec::sphere(31), ManifoldSpec::spd(2),
      ManifoldSpec::spd(5),      ManifoldSpec::spd(31),    ManifoldSpec::euclidean(5)};

  for (const auto& spec : roundtrip_specs) {
    Rng rng(opt.seed);
    double exp_log = 0.0;
    double log_exp = 0.0;
    double asym = 0.0;
    const double inj = spec.kind() == ManifoldKind::Sphere ? std::numbers::pi * spec.radius() : 3.0;
    std::uniform_real_distribution<double> length(0.0, 0.9 * inj);
    for (int k = 0; k < opt.pairs; ++k) {
      const Point x = random_point(spec, rng);
      const Point y = random_point(spec, rng);
      exp_log = std::max(exp_log, detail::relative(exp(spec, x, log(spec, x, y)).data, y.data));
      const Tangent u = random_tangent(spec, x, rng, length(rng));
      const Tangent back = log(spec, x, exp(spec, x, u));
      log_exp = std::max(log_exp, norm(spec, Tangent{x, back.data - u.data}) / std::max(1.0, norm(spec, u)));
      const double dxy = dist(spec, x, y);
      asym = std::max(asym, std::abs(dxy - dist(spec, y, x)) / std::max(1.0, dxy));
    }
    report.checks.push_back(at_most("exp(log) roundtrip " + spec.name(), exp_log, opt.roundtrip_tol));
    report.checks.push_back(at_most("log(exp) roundtrip " + spec.name(), log_exp, opt.roundtrip_tol));
    report.checks.push_back(at_most("dist symmetry " + spec.name(), asym, 1e-10));
  }

  for (const auto& spec : {ManifoldSpec::sphere(3), ManifoldSpec::sphere(31), ManifoldSpec::spd(2),
                           ManifoldSpec::spd(5), ManifoldSpec::euclidean(5)}) {
    report.checks.push_back(at_most("transport isometry " + spec.name(),
                                    audit_transport_isometry(spec, opt.transport_trials, opt.seed + 1),
                                    opt.isometry_tol));
  }

  const auto grid = log_grid(1e-4, 1e-1, 7);
  {
    const auto spec = ManifoldSpec::sphere(3);
    const auto rep = estimate_retraction_constants(spec, opt.retraction_trials, grid, opt.seed + 2);
    report.checks.push_back({"retraction gap slope " + spec.name(),
                             rep.slope >= opt.slope_lo && rep.slope <= opt.slope_hi, rep.slope, opt.slope_hi,
                             "in", "expected in [" + format_double(opt.slope_lo) + ", " +
                                       format_double(opt.slope_hi) + "]"});
    report.checks.push_back(at_most("retraction cbar " + spec.name(), rep.cbar_hat, opt.cbar_max));
    report.checks.push_back(report_only("retraction cR " + spec.name(), rep.cR_hat));
  }
  for (const auto& spec : {ManifoldSpec::spd(2), ManifoldSpec::spd(5), ManifoldSpec::euclidean(5)}) {
    const auto rep = estimate_retraction_constants(spec, opt.retraction_trials, grid, opt.seed + 3);
    report.checks.push_back(at_most("retraction cR (retraction = exp) " + spec.name(), rep.cR_hat,
                                    opt.cr_exact_max,
                                    "max raw gap " + format_double(rep.max_raw_gap)));
  }

  {
    // Stiefel: QR retraction lands on the manifold; projection transport is
    // not an isometry, so its distortion is only reported.
    const auto spec = ManifoldSpec::stiefel(6, 3);
    Rng rng(opt.seed + 4);
    double orth = 0.0;
    double distortion = 0.0;
    for (int k = 0; k < opt.transport_trials; ++k) {
      const Point x = random_point(spec, rng);
      const Tangent u = random_tangent(spec, x, rng, 0.5);
      const Point z = retract(spec, x, u);
      const Eigen::MatrixXd zm = as_matrix(spec, z.data);
      orth = std::max(orth, (zm.transpose() * zm - Eigen::MatrixXd::Identity(3, 3)).norm());
      const double before = inner(spec, u, u);
      const double after = inner(spec, transport(spec, x, z, u), transport(spec, x, z, u));
      distortion = std::max(distortion, std::abs(after - before) / (1.0 + before));
    }
    report.checks.push_back(at_most("QR retraction orthonormality " + spec.name(), orth, 1e-10));
    report.checks.push_back(report_only("projection transport distortion " + spec.name(), distortion));
  }
  report.seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------

struct GradientSuiteOptions {
  bool robust_mle = true;
  bool synthetic = true;
  Index d = 5;
  Index n = 20;
  double c = -5.0;
  Index k = 20;
  Index m = 10;
  double mu = 1.0;
  int triples = 20;
  std::uint64_t seed = 11;
  double exp_tol = 1e-4;
  double retraction_tol = 1e-3;
};

/// max over triples of |<grad, u> - FD| / (1 + |<grad, u>|), for both variables.
inline double gradient_fd_error(const MinimaxProblem& p, int triples, std::uint64_t seed, Wrt wrt) {
  Rng rng(seed);
  double worst = 0.0;
  const ManifoldSpec& spec = wrt == Wrt::X ? p.mx() : p.my();
  for (int k = 0; k < triples; ++k) {
    const Point x = random_point(p.mx(), rng);
    // Keep SPD iterates in a moderate condition range.
    const Point y = random_point(p.my(), rng);
    const Point& base = wrt == Wrt::X ? x : y;
    const Tangent u = random_tangent(spec, base, rng, 1.0, {p.tolerances(), nullptr});
    const Tangent g = wrt == Wrt::X ? p.grad_x(x, y) : p.grad_y(x, y);
    const double analytic = inner(spec, g, u, {p.tolerances(), nullptr});
    const double fd = finite_diff_directional(p, x, y, u, wrt, default_step(spec));
    worst = std::max(worst, std::abs(analytic - fd) / (1.0 + std::abs(analytic)));
  }
  return worst;
}

inline SuiteReport gradient_suite(const GradientSuiteOptions& opt = {}) {
  detail::Stopwatch clock;
  SuiteReport report{"gradients", {}, 0.0};
  auto add = [&](const MinimaxProblem& p, const std::string& label) {
    for (Wrt wrt : {Wrt::X, Wrt::Y}) {
      const ManifoldSpec& spec = wrt == Wrt::X ? p.mx() : p.my();
      const double tol = spec.has_exp() ? opt.exp_tol : opt.retraction_tol;
      report.checks.push_back(at_most("finite-difference grad_" + std::string(wrt == Wrt::X ? "x " : "y ") + label,
                                      gradient_fd_error(p, opt.triples, opt.seed, wrt), tol));
    }
  };
  if (opt.robust_mle) {
    const auto p = generate_gaussian_instance(opt.d, opt.n, opt.c, opt.seed);
    add(p, "robust-mle(d=" + std::to_string(opt.d) + ",n=" + std::to_string(opt.n) + ")");
    // Full-batch sampled oracle equals the exact oracle.
    Rng rng(opt.seed);
    const Point x = random_point(p.mx(), rng);
    const Point y = random_point(p.my(), rng);
    const Batch all = full_batch(p.samples());
    const double ex = (p.stoch_grad_x(x, y, all, rng).data - p.grad_x(x, y).data).norm();
    const double ey = (p.stoch_grad_y(x, y, all, rng).data - p.grad_y(x, y).data).norm();
    report.checks.push_back(at_most("full-batch oracle == exact oracle robust-mle", std::max(ex, ey), 1e-12));
  }
  if (opt.synthetic) {
    const auto p = generate_synthetic_quadratic(opt.k, opt.m, opt.mu, 0.0, opt.seed);
    add(p, "synthetic-quadratic(k=" + std::to_string(opt.k) + ",m=" + std::to_string(opt.m) + ")");
  }
  report.seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------

struct RateSuiteOptions {
  int decades = 2;
  std::uint64_t problem_seed = 1;
  std::uint64_t run_seed = 1;
  double slope_max = -0.4;
  double r2_min = 0.9;
  double drop_max = 0.1;
};

struct RateMeasurement {
  SlopeFit fit;
  std::vector<std::pair<double, double>> budgets;  // (T, running-min stationarity)
};

/// RAGDA on the synthetic quadratic (k=20, m=10, mu=1) with alpha=0.5,
/// beta=0.3, eta_x=0.5, eta_y=5, v0=1e-6; running-min stationarity at
/// T = 10^2, 10^2.5, ..., 10^(2+decades).
inline RateMeasurement measure_deterministic_rate(const RateSuiteOptions& opt) {
  const auto p = generate_synthetic_quadratic(20, 10, 1.0, 0.0, opt.problem_seed);
  SolverConfig cfg;
  cfg.method = Method::Ragda;
  cfg.alpha = 0.5;
  cfg.beta = 0.3;
  cfg.eta_x = 0.5;
  cfg.eta_y = 5.0;
  cfg.v0_x = cfg.v0_y = 1e-6;
  cfg.seed = opt.run_seed;
  cfg.max_records = 100;
  RateMeasurement out;
  std::vector<std::int64_t> budgets;
  for (int i = 0; i <= 2 * opt.decades; ++i)
    budgets.push_back(static_cast<std::int64_t>(std::llround(std::pow(10.0, 2.0 + 0.5 * i))));
  cfg.max_iters = budgets.back();
  const Trace trace = run(p, cfg);
  for (auto t : budgets) out.budgets.emplace_back(static_cast<double>(t), trace.running_min_at(t));
  out.fit = fit_rate(out.budgets);
  return out;
}

inline SuiteReport rate_suite(const RateSuiteOptions& opt = {}) {
  detail::Stopwatch clock;
  SuiteReport report{"rates", {}, 0.0};
  const auto m = measure_deterministic_rate(opt);
  report.checks.push_back(at_most("RAGDA running-min slope", m.fit.slope, opt.slope_max));
  report.checks.push_back(at_least("RAGDA slope fit r2", m.fit.r2, opt.r2_min));
  report.checks.push_back(at_most("RAGDA min-stationarity drop T_max/T_min",
                                  m.budgets.back().second / m.budgets.front().second, opt.drop_max));
  report.seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------

struct StochasticSuiteOptions {
  int seeds = 10;
  std::vector<std::int64_t> budgets = {1000, 10000, 100000};
  double sigma = 0.1;
  std::uint64_t problem_seed = 1;
  double competitive_factor = 1.5;
};

/// Mean over seeds of (running-min exact stationarity)^2 at each budget.
inline std::vector<double> mean_squared_running_min(const MinimaxProblem& p, double alpha, double beta,
                                                    const StochasticSuiteOptions& opt) {
  std::vector<double> mean(opt.budgets.size(), 0.0);
  for (int s = 0; s < opt.seeds; ++s) {
    SolverConfig cfg;
    cfg.method = Method::Rsagda;
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.eta_x = 0.5;
    cfg.eta_y = 5.0;
    cfg.v0_x = cfg.v0_y = 1e-6;
    cfg.batch_size = 1;
    cfg.eval_stride = 1;
    cfg.max_records = 100;
    cfg.max_iters = opt.budgets.back();
    cfg.seed = static_cast<std::uint64_t>(s);
    const Trace trace = run(p, cfg);
    for (std::size_t i = 0; i < opt.budgets.size(); ++i) {
      const double v = trace.running_min_at(opt.budgets[i]);
      mean[i] += v * v / opt.seeds;
    }
  }
  return mean;
}

inline SuiteReport stochastic_suite(const StochasticSuiteOptions& opt = {}) {
  detail::Stopwatch clock;
  SuiteReport report{"stochastic", {}, 0.0};
  const auto p = generate_synthetic_quadratic(20, 10, 1.0, opt.sigma, opt.problem_seed);
  const auto slow = mean_squared_running_min(p, 2.0 / 3.0, 1.0 / 3.0, opt);
  const auto fast = mean_squared_running_min(p, 0.5, 0.5, opt);
  for (std::size_t i = 0; i < slow.size(); ++i) {
    report.checks.push_back(report_only("alpha=2/3 mean sq. stationarity T=" + std::to_string(opt.budgets[i]), slow[i]));
    report.checks.push_back(report_only("alpha=1/2 mean sq. stationarity T=" + std::to_string(opt.budgets[i]), fast[i]));
  }
  bool decreasing = true;
  double worst_ratio = 0.0;
  for (std::size_t i = 1; i < slow.size(); ++i) {
    decreasing = decreasing && slow[i] < slow[i - 1];
    worst_ratio = std::max(worst_ratio, slow[i] / slow[i - 1]);
  }
  report.checks.push_back({"alpha=2/3 decreases across budgets", decreasing, worst_ratio, 1.0, "<",
                           "largest consecutive ratio"});
  report.checks.push_back(at_most("alpha=1/2 vs alpha=2/3 at T_max", fast.back() / slow.back(),
                                  opt.competitive_factor));
  report.seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------

inline bool same_bits(const AdaptiveState& a, const AdaptiveState& b) {
  return a.t == b.t && a.vx == b.vx && a.vy == b.vy && a.x.data == b.x.data && a.y.data == b.y.data;
}

/// Relative mismatch between the final accumulators and v0 + sum of the
/// recorded squared gradient norms (needs every step recorded).
inline double accumulator_replay_error(const Trace& trace) {
  double vx = trace.config.v0_x;
  double vy = trace.config.v0_y;
  for (const auto& r : trace.records) {
    vx += r.grad_x_norm * r.grad_x_norm;
    vy += r.grad_y_norm * r.grad_y_norm;
  }
  return std::max(std::abs(vx - trace.final_state.vx) / trace.final_state.vx,
                  std::abs(vy - trace.final_state.vy) / trace.final_state.vy);
}

inline bool stepsizes_nonincreasing(const Trace& trace) {
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    if (trace.records[i].eta_t > trace.records[i - 1].eta_t) return false;
    if (trace.records[i].gamma_t > trace.records[i - 1].gamma_t) return false;
  }
  return true;
}

struct IdentitySuiteOptions {
  int steps = 100;
  std::uint64_t seed = 5;
  double replay_tol = 1e-9;
};

inline SuiteReport identity_suite(const IdentitySuiteOptions& opt = {}) {
  detail::Stopwatch clock;
  SuiteReport report{"identity", {}, 0.0};

  auto lockstep = [&](const MinimaxProblem& p, Index batch, double alpha, double beta) {
    SolverConfig cfg;
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.batch_size = batch;
    Rng init = substream(opt.seed, 0);
    auto [x0, y0] = p.initial_point(init);
    AdaptiveState a = initial_state(cfg, x0, y0);
    AdaptiveState b = a;
    StreamPair streams = make_streams(opt.seed);
    int matched = 0;
    try {
      for (int t = 0; t < opt.steps; ++t) {
        a = ragda_step(p, a, cfg);
        b = rsagda_step(p, b, cfg, streams);
        if (!same_bits(a, b)) break;
        ++matched;
      }
    } catch (const Error&) {
    }
    return matched;
  };

  const auto quad = generate_synthetic_quadratic(20, 10, 1.0, 0.0, opt.seed);
  const auto mle = generate_gaussian_instance(5, 20, -5.0, opt.seed);
  report.checks.push_back(at_least("RSAGDA(sigma=0, batch=1) == RAGDA bitwise steps",
                                   lockstep(quad, 1, 0.6, 0.3), opt.steps));
  report.checks.push_back(at_least("RSAGDA(full batch) == RAGDA bitwise steps robust-mle",
                                   lockstep(mle, mle.samples(), 0.5, 0.5), opt.steps));

  double replay = 0.0;
  bool monotone = true;
  const std::vector<std::pair<const MinimaxProblem*, Method>> runs = {
      {&quad, Method::Ragda}, {&mle, Method::Ragda}, {&mle, Method::Rsagda},
      {&quad, Method::Rsagda}};
  for (const auto& [p, method] : runs) {
    SolverConfig cfg;
    cfg.method = method;
    cfg.alpha = 0.5;
    cfg.beta = 0.5;
    cfg.batch_size = 4;
    cfg.max_iters = 500;
    cfg.seed = opt.seed;
    const Trace trace = run(*p, cfg);
    replay = std::max(replay, accumulator_replay_error(trace));
    monotone = monotone && stepsizes_nonincreasing(trace);
  }
  report.checks.push_back(at_most("accumulator replay relative error", replay, opt.replay_tol));
  report.checks.push_back({"eta_t, gamma_t nonincreasing", monotone, monotone ? 1.0 : 0.0, 1.0, "==", ""});
  report.seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------

struct LemmaSuiteOptions {
  int sequences = 1000;
  int max_length = 200;
  std::uint64_t seed = 17;
};

inline SuiteReport lemma_suite(const LemmaSuiteOptions& opt = {}) {
  detail::Stopwatch clock;
  SuiteReport report{"lemma", {}, 0.0};
  Rng rng(opt.seed);
  std::uniform_int_distribution<int> length(1, opt.max_length);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> magnitude(-6.0, 6.0);
  int violations = 0;
  int at_one = 0;
  for (int s = 0; s < opt.sequences; ++s) {
    const int len = length(rng);
    std::vector<double> a(static_cast<std::size_t>(len));
    for (auto& v : a) v = unit(rng) < 0.2 ? 0.0 : std::pow(10.0, magnitude(rng));
    if (!(a[0] > 0.0)) a[0] = std::pow(10.0, magnitude(rng));
    // Every tenth sequence exercises the alpha = 1 logarithmic bound.
    double alpha = s % 10 == 9 ? 1.0 : 0.0;
    while (!(alpha > 0.0)) alpha = unit(rng);
    if (alpha == 1.0) ++at_one;
    if (!check_adaptive_sum_inequality(a, alpha)) ++violations;
  }
  report.checks.push_back(at_most("adaptive-sum inequality violations", violations, 0.0,
                                  std::to_string(opt.sequences) + " sequences, " + std::to_string(at_one) +
                                      " at alpha=1"));
  report.seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------

struct ReproductionSuiteOptions {
  std::int64_t iterations = 3000;
  std::uint64_t instance_seed = 2025;
  std::uint64_t run_seed = 7;
};

struct ReproductionResult {
  Trace ragda;
  Trace gda;
};

/// Robust MLE (d=30, n=100, c=-5): RAGDA (eta_x=0.5, eta_y=5, v0=1e-6,
/// alpha=beta=0.5) against GDA (eta=5e-4) from the same start.
inline ReproductionResult run_reproduction(const ReproductionSuiteOptions& opt) {
  const auto p = generate_gaussian_instance(30, 100, -5.0, opt.instance_seed);
  SolverConfig ragda;
  ragda.method = Method::Ragda;
  ragda.eta_x = 0.5;
  ragda.eta_y = 5.0;
  ragda.alpha = ragda.beta = 0.5;
  ragda.v0_x = ragda.v0_y = 1e-6;
  ragda.max_iters = opt.iterations;
  ragda.seed = opt.run_seed;
  SolverConfig gda = ragda;
  gda.method = Method::Gda;
  gda.eta_x = gda.eta_y = 5e-4;
  return {run(p, ragda), run(p, gda)};
}

inline SuiteReport reproduction_suite(const ReproductionSuiteOptions& opt = {}) {
  detail::Stopwatch clock;
  SuiteReport report{"reproduction", {}, 0.0};
  const auto r = run_reproduction(opt);
  report.checks.push_back({"RAGDA finished without NumericalError", r.ragda.stop_reason != StopReason::NumericalError,
                           static_cast<double>(r.ragda.iterations), static_cast<double>(opt.iterations), "==",
                           r.ragda.error});
  report.checks.push_back(report_only("GDA min stationarity", r.gda.min_stationarity));
  report.checks.push_back(at_most("RAGDA min stationarity vs GDA", r.ragda.min_stationarity,
                                  r.gda.min_stationarity));
  report.seconds = clock.seconds();
  return report;
}

// ---------------------------------------------------------------------------

/// key=value lines, the same structured text used for run summaries.
inline std::string format_report(const SuiteReport& report) {
  std::ostringstream out;
  out << "suite=" << report.suite << "\n";
  out << "passed=" << (report.passed() ? "true" : "false") << "\n";
  out << "seconds=" << format_double(report.seconds) << "\n";
  for (std::size_t i = 0; i < report.checks.size(); ++i) {
    const auto& c = report.checks[i];
    const std::string key = "check." + std::to_string(i);
    out << key << ".name=" << c.name << "\n";
    out << key << ".passed=" << (c.passed ? "true" : "false") << "\n";
    out << key << ".value=" << format_double(c.value) << "\n";
    out << key << ".relation=" << c.relation << "\n";
    out << key << ".threshold=" << format_double(c.threshold) << "\n";
    if (!c.detail.empty()) out << key << ".detail=" << c.detail << "\n";
  }
  return out.str();
}

inline std::string format_table(const SuiteReport& report) {
  std::ostringstream out;
  for (const auto& c : report.checks) {
    out << (c.relation == "info" ? "[INFO] " : c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": "
        << format_double(c.value);
    if (c.relation != "info") out << " " << c.relation << " " << format_double(c.threshold);
    if (!c.detail.empty()) out << "  (" << c.detail << ")";
    out << "\n";
  }
  out << report.suite << ": " << (report.passed() ? "PASS" : "FAIL") << " in "
      << format_double(std::round(report.seconds * 100.0) / 100.0) << " s\n";
  return out.str();
}

}  // namespace ragda::verify
