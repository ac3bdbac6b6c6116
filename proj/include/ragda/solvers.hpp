#pragma once

// Single-loop gradient descent ascent on M_x x M_y.
//
//   RAGDA   exact gradients, adaptive stepsizes
//   RSAGDA  sampled gradients (independent batches for x and y), adaptive
//   GDA     one fixed stepsize for both variables
//   TSGDA   fixed, separate stepsizes (two timescales)
//
// Adaptive step at iteration t, in this order:
//   v^x <- v^x + |g^x|^2,  v^y <- v^y + |g^y|^2
//   eta_t   = eta_x / max(v^x, v^y)^alpha
//   gamma_t = eta_y / (v^y)^beta
//   x <- Retr_x(-eta_t g^x),  y <- Retr_y(gamma_t g^y)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ragda/error.hpp"
#include "ragda/manifold.hpp"
#include "ragda/problems.hpp"

namespace ragda {

enum class Method { Ragda, Rsagda, Gda, Tsgda };

constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::Ragda: return "ragda";
    case Method::Rsagda: return "rsagda";
    case Method::Gda: return "gda";
    case Method::Tsgda: return "tsgda";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "ragda") return Method::Ragda;
  if (s == "rsagda") return Method::Rsagda;
  if (s == "gda") return Method::Gda;
  if (s == "tsgda") return Method::Tsgda;
  fail(ErrorCode::ConfigError, "unknown solver '" + std::string(s) + "'");
}

inline bool is_adaptive(Method m) { return m == Method::Ragda || m == Method::Rsagda; }

struct SolverConfig {
  Method method = Method::Ragda;
  double eta_x = 0.5;
  double eta_y = 5.0;
  double alpha = 0.5;
  double beta = 0.5;
  double v0_x = 1e-6;
  double v0_y = 1e-6;
  std::int64_t max_iters = 1000;
  double grad_tol = 0.0;
  Index batch_size = 1;
  std::uint64_t seed = 0;
  /// RSAGDA only: exact stationarity is evaluated every `eval_stride` steps.
  std::int64_t eval_stride = 50;
  /// Upper bound on stored IterationRecords; longer runs are strided.
  std::int64_t max_records = 10000;
  /// Record d(y_t, y*(x_t)) when the problem has a closed-form maximiser.
  bool track_inner_max = false;
};

inline void validate(const SolverConfig& cfg) {
  auto bad = [](const std::string& what) { fail(ErrorCode::ConfigError, what); };
  if (!(cfg.eta_x > 0.0)) bad("eta_x must be > 0");
  if (!(cfg.eta_y > 0.0)) bad("eta_y must be > 0");
  if (is_adaptive(cfg.method)) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) bad("alpha must lie in (0, 1)");
    if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) bad("beta must lie in (0, 1)");
    if (!(cfg.v0_x > 0.0)) bad("v0_x must be > 0");
    if (!(cfg.v0_y > 0.0)) bad("v0_y must be > 0");
  }
  if (cfg.max_iters < 0) bad("max_iters must be >= 0");
  if (!(cfg.grad_tol >= 0.0)) bad("grad_tol must be >= 0");
  if (cfg.batch_size < 1) bad("batch_size must be >= 1");
  if (cfg.eval_stride < 1) bad("eval_stride must be >= 1");
  if (cfg.max_records < 1) bad("max_records must be >= 1");
}

/// Configurations outside the parameter regimes covered by the convergence
/// theory are allowed; this lists which regime assumptions they break.
inline std::vector<std::string> regime_flags(const SolverConfig& cfg) {
  std::vector<std::string> flags;
  if (cfg.method == Method::Ragda && !(cfg.beta < cfg.alpha)) {
    flags.push_back(cfg.alpha == cfg.beta ? "alpha==beta outside the deterministic regime (beta < alpha)"
                                          : "beta>alpha outside the deterministic regime (beta < alpha)");
  }
  if (cfg.method == Method::Rsagda) {
    if (!(cfg.beta <= cfg.alpha))
      flags.push_back("beta>alpha outside both stochastic regimes");
    else if (!(2.0 * cfg.beta <= cfg.alpha))
      flags.push_back("2*beta>alpha: only the second-order-smooth stochastic regime (beta <= alpha) applies");
  }
  return flags;
}

struct AdaptiveState {
  double vx = 0.0;
  double vy = 0.0;
  Point x;
  Point y;
  std::int64_t t = 0;
};

inline AdaptiveState initial_state(const SolverConfig& cfg, Point x0, Point y0) {
  return {cfg.v0_x, cfg.v0_y, std::move(x0), std::move(y0), 0};
}

/// What one step saw: the gradient norms fed into the accumulators and the
/// stepsizes actually applied.
struct StepInfo {
  double grad_x_norm = 0.0;
  double grad_y_norm = 0.0;
  double eta = 0.0;
  double gamma = 0.0;
};

/// Independent generators for the x-batches and y-batches of RSAGDA.
struct StreamPair {
  Rng x;
  Rng y;
};

/// Deterministic substream `index` of `seed`.
inline Rng substream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

inline StreamPair make_streams(std::uint64_t seed) { return {substream(seed, 1), substream(seed, 2)}; }

namespace detail {

struct GradPair {
  Tangent gx;
  Tangent gy;
  double sq_x;
  double sq_y;
};

inline GradPair measure(const MinimaxProblem& p, Tangent gx, Tangent gy, ClampCounter* clamps) {
  const GeometryContext ctx{p.tolerances(), clamps};
  const double sx = detail::inner(p.mx(), gx.base.data, gx.data, gx.data, ctx);
  const double sy = detail::inner(p.my(), gy.base.data, gy.data, gy.data, ctx);
  if (!std::isfinite(sx) || !std::isfinite(sy))
    fail(ErrorCode::NumericalError, "non-finite gradient at t");
  return {std::move(gx), std::move(gy), std::max(0.0, sx), std::max(0.0, sy)};
}

inline GradPair exact_grads(const MinimaxProblem& p, const AdaptiveState& s, ClampCounter* clamps) {
  return measure(p, p.grad_x(s.x, s.y, clamps), p.grad_y(s.x, s.y, clamps), clamps);
}

inline Batch draw_batch(const MinimaxProblem& p, Index size, Rng& rng) {
  const Index n = p.sample_count();
  if (n == 1) return Batch{std::vector<Index>(static_cast<std::size_t>(size), 0)};
  if (size >= n) return full_batch(n);
  return sample_batch(n, size, rng);
}

inline GradPair sampled_grads(const MinimaxProblem& p, const AdaptiveState& s, Index batch_size,
                              StreamPair& rng, ClampCounter* clamps) {
  const Batch bx = draw_batch(p, batch_size, rng.x);
  const Batch by = draw_batch(p, batch_size, rng.y);
  return measure(p, p.stoch_grad_x(s.x, s.y, bx, rng.x, clamps),
                 p.stoch_grad_y(s.x, s.y, by, rng.y, clamps), clamps);
}

inline AdaptiveState apply_update(const MinimaxProblem& p, const AdaptiveState& s, const GradPair& g,
                                  const SolverConfig& cfg, StepInfo* info, ClampCounter* clamps) {
  const GeometryContext ctx{p.tolerances(), clamps};
  AdaptiveState next;
  next.t = s.t + 1;
  double eta = cfg.eta_x;
  double gamma = cfg.eta_x;
  if (is_adaptive(cfg.method)) {
    next.vx = s.vx + g.sq_x;
    next.vy = s.vy + g.sq_y;
    eta = cfg.eta_x / std::pow(std::max(next.vx, next.vy), cfg.alpha);
    gamma = cfg.eta_y / std::pow(next.vy, cfg.beta);
  } else {
    next.vx = s.vx;
    next.vy = s.vy;
    if (cfg.method == Method::Tsgda) gamma = cfg.eta_y;
  }
  next.x = retract(p.mx(), s.x, scaled(g.gx, -eta), ctx);
  next.y = retract(p.my(), s.y, scaled(g.gy, gamma), ctx);
  if (info != nullptr) *info = {std::sqrt(g.sq_x), std::sqrt(g.sq_y), eta, gamma};
  return next;
}

}  // namespace detail

inline AdaptiveState ragda_step(const MinimaxProblem& p, const AdaptiveState& s, const SolverConfig& cfg,
                                StepInfo* info = nullptr, ClampCounter* clamps = nullptr) {
  SolverConfig c = cfg;
  c.method = Method::Ragda;
  return detail::apply_update(p, s, detail::exact_grads(p, s, clamps), c, info, clamps);
}

inline AdaptiveState rsagda_step(const MinimaxProblem& p, const AdaptiveState& s, const SolverConfig& cfg,
                                 StreamPair& rng, StepInfo* info = nullptr, ClampCounter* clamps = nullptr) {
  SolverConfig c = cfg;
  c.method = Method::Rsagda;
  return detail::apply_update(p, s, detail::sampled_grads(p, s, cfg.batch_size, rng, clamps), c, info,
                              clamps);
}

inline AdaptiveState gda_step(const MinimaxProblem& p, const AdaptiveState& s, const SolverConfig& cfg,
                              StepInfo* info = nullptr, ClampCounter* clamps = nullptr) {
  SolverConfig c = cfg;
  c.method = Method::Gda;
  return detail::apply_update(p, s, detail::exact_grads(p, s, clamps), c, info, clamps);
}

inline AdaptiveState tsgda_step(const MinimaxProblem& p, const AdaptiveState& s, const SolverConfig& cfg,
                                StepInfo* info = nullptr, ClampCounter* clamps = nullptr) {
  SolverConfig c = cfg;
  c.method = Method::Tsgda;
  return detail::apply_update(p, s, detail::exact_grads(p, s, clamps), c, info, clamps);
}

/// Exact Riemannian gradient norms (|grad_x f|, |grad_y f|) at (x, y).
inline std::pair<double, double> stationarity(const MinimaxProblem& p, const Point& x, const Point& y,
                                              ClampCounter* clamps = nullptr) {
  const GeometryContext ctx{p.tolerances(), clamps};
  return {norm(p.mx(), p.grad_x(x, y, clamps), ctx), norm(p.my(), p.grad_y(x, y, clamps), ctx)};
}

// ---------------------------------------------------------------------------

struct IterationRecord {
  std::int64_t t = 0;
  double grad_x_norm = 0.0;
  double grad_y_norm = 0.0;
  double eta_t = 0.0;
  double gamma_t = 0.0;
  double f_value = 0.0;
  double wall_s = 0.0;
  std::optional<double> dist_to_ystar;
};

enum class StopReason { Converged, MaxIters, NumericalError };

constexpr std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::Converged: return "Converged";
    case StopReason::MaxIters: return "MaxIters";
    case StopReason::NumericalError: return "NumericalError";
  }
  return "?";
}

/// Exact stationarity |grad_x f| + |grad_y f| evaluated at iterate t.
struct StationarityCheck {
  std::int64_t t = 0;
  double value = 0.0;
};

struct Trace {
  SolverConfig config;
  std::vector<IterationRecord> records;
  std::vector<StationarityCheck> checks;
  StopReason stop_reason = StopReason::MaxIters;
  double min_stationarity = std::numeric_limits<double>::infinity();
  std::int64_t iterations = 0;
  std::int64_t oracle_calls = 0;
  /// Largest gradient norm fed to the update (empirical stand-in for G).
  double max_grad_norm = 0.0;
  std::size_t clamp_events = 0;
  std::vector<std::string> regime_flags;
  std::string error;
  AdaptiveState final_state;

  /// min over checks with t < budget; +inf if there are none.
  double running_min_at(std::int64_t budget) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : checks) {
      if (c.t >= budget) break;
      best = std::min(best, c.value);
    }
    return best;
  }
};

struct RunCallbacks {
  std::function<void(const IterationRecord&)> on_record;
};

inline std::int64_t record_stride(const SolverConfig& cfg) {
  if (cfg.max_iters <= cfg.max_records) return 1;
  return (cfg.max_iters + cfg.max_records - 1) / cfg.max_records;
}

inline Trace run_from(const MinimaxProblem& p, const SolverConfig& cfg, Point x0, Point y0,
                      const RunCallbacks& callbacks = {}) {
  validate(cfg);
  Trace trace;
  trace.config = cfg;
  trace.regime_flags = regime_flags(cfg);

  ClampCounter clamps;
  StreamPair streams = make_streams(cfg.seed);
  AdaptiveState state = initial_state(cfg, std::move(x0), std::move(y0));
  const std::int64_t stride = record_stride(cfg);
  const bool stochastic = cfg.method == Method::Rsagda;
  const auto start = std::chrono::steady_clock::now();

  auto note_check = [&](std::int64_t t, double value) {
    trace.checks.push_back({t, value});
    trace.min_stationarity = std::min(trace.min_stationarity, value);
    return value <= cfg.grad_tol;
  };

  trace.stop_reason = StopReason::MaxIters;
  try {
    while (state.t < cfg.max_iters) {
      const std::int64_t t = state.t;
      detail::GradPair g = stochastic ? detail::sampled_grads(p, state, cfg.batch_size, streams, &clamps)
                                      : detail::exact_grads(p, state, &clamps);
      trace.oracle_calls += 2;

      bool converged = false;
      if (!stochastic) {
        converged = note_check(t, std::sqrt(g.sq_x) + std::sqrt(g.sq_y));
      } else if (t % cfg.eval_stride == 0) {
        const auto exact = detail::exact_grads(p, state, &clamps);
        trace.oracle_calls += 2;
        converged = note_check(t, std::sqrt(exact.sq_x) + std::sqrt(exact.sq_y));
      }
      if (converged) {
        trace.stop_reason = StopReason::Converged;
        break;
      }

      const bool record = t % stride == 0;
      IterationRecord rec;
      if (record) {
        rec.t = t;
        rec.f_value = p.value(state.x, state.y, &clamps);
        if (cfg.track_inner_max) {
          const auto star = p.inner_max(state.x);
          rec.dist_to_ystar = dist(p.my(), state.y, star.y_star, {p.tolerances(), &clamps});
        }
      }

      StepInfo info;
      AdaptiveState next = detail::apply_update(p, state, g, cfg, &info, &clamps);
      trace.max_grad_norm = std::max({trace.max_grad_norm, info.grad_x_norm, info.grad_y_norm});
      if (!next.x.data.allFinite() || !next.y.data.allFinite())
        fail(ErrorCode::NumericalError, "iterate became non-finite at t=" + std::to_string(t));
      state = std::move(next);

      if (record) {
        rec.grad_x_norm = info.grad_x_norm;
        rec.grad_y_norm = info.grad_y_norm;
        rec.eta_t = info.eta;
        rec.gamma_t = info.gamma;
        rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (callbacks.on_record) callbacks.on_record(rec);
        trace.records.push_back(std::move(rec));
      }
    }
  } catch (const Error& e) {
    trace.stop_reason = StopReason::NumericalError;
    trace.error = e.what();
  }
  trace.iterations = state.t;
  trace.clamp_events = clamps.events;
  trace.final_state = std::move(state);
  return trace;
}

/// Runs from `p.initial_point` drawn with substream 0 of `cfg.seed`.
inline Trace run(const MinimaxProblem& p, const SolverConfig& cfg, const RunCallbacks& callbacks = {}) {
  validate(cfg);
  Rng init = substream(cfg.seed, 0);
  auto [x0, y0] = p.initial_point(init);
  return run_from(p, cfg, std::move(x0), std::move(y0), callbacks);
}

}  // namespace ragda
