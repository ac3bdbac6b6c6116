#pragma once

// Independent numerical oracles. Nothing here calls into the solvers: each
// check is built from the problem's value oracle and the geometry kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "ragda/error.hpp"
#include "ragda/manifold.hpp"
#include "ragda/problems.hpp"

namespace ragda::verify {

enum class Wrt { X, Y };

/// Step used by finite_diff_directional when the manifold has an exponential
/// map, and when it has to fall back to the retraction.
inline constexpr double kExpStep = 1e-5;
inline constexpr double kRetractionStep = 1e-6;

inline double default_step(const ManifoldSpec& spec) {
  return spec.has_exp() ? kExpStep : kRetractionStep;
}

/// Central difference (f(c(h)) - f(c(-h))) / 2h along the curve
/// c(s) = Exp(s u) (or Retr(s u) where Exp is unavailable).
inline double finite_diff_directional(const MinimaxProblem& p, const Point& x, const Point& y,
                                      const Tangent& u, Wrt wrt, double h) {
  if (!(h > 0.0)) fail(ErrorCode::InvalidInput, "finite-difference step must be > 0");
  const ManifoldSpec& spec = wrt == Wrt::X ? p.mx() : p.my();
  const Point& base = wrt == Wrt::X ? x : y;
  const GeometryContext ctx{p.tolerances(), nullptr};
  auto move = [&](double s) {
    const Tangent step = scaled(u, s);
    return spec.has_exp() ? exp(spec, base, step, ctx) : retract(spec, base, step, ctx);
  };
  const Point plus = move(h);
  const Point minus = move(-h);
  const double fp = wrt == Wrt::X ? p.value(plus, y) : p.value(x, plus);
  const double fm = wrt == Wrt::X ? p.value(minus, y) : p.value(x, minus);
  return (fp - fm) / (2.0 * h);
}

// ---------------------------------------------------------------------------

struct GeometryReport {
  /// Smallest admissible c-bar (>= 1) with d^2(x, Retr(u)) <= c-bar |u|^2.
  double cbar_hat = 1.0;
  /// max |Exp^-1(Retr(u)) - u| / |u|^2 over the samples.
  double cR_hat = 0.0;
  /// Fitted log-log exponent of |Exp^-1(Retr(tu)) - tu| against t; NaN when
  /// no gap rises above the round-off floor (retraction == exponential map).
  double slope = std::numeric_limits<double>::quiet_NaN();
  std::int64_t samples = 0;
  /// Samples whose gap exceeded the round-off floor and entered cR / slope.
  std::int64_t resolved = 0;
  /// Largest raw gap, including samples below the floor.
  double max_raw_gap = 0.0;
};

/// Gaps below this are indistinguishable from the round-off of one
/// log(retract(.)) evaluation and carry no information about c_R.
inline double gap_resolution(const ManifoldSpec& spec, double step_norm) {
  return 64.0 * std::numeric_limits<double>::epsilon() *
         std::sqrt(static_cast<double>(spec.storage_size())) * (1.0 + step_norm);
}

inline std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double s = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    out.push_back(std::pow(10.0, std::log10(lo) + s * (std::log10(hi) - std::log10(lo))));
  }
  return out;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
};

inline LineFit least_squares(std::span<const double> xs, std::span<const double> ys) {
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  // A perfectly flat response is fitted exactly by slope 0.
  fit.r2 = (syy > 0.0 && sxx > 0.0) ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  return fit;
}

inline GeometryReport estimate_retraction_constants(const ManifoldSpec& spec, int trials,
                                                    std::span<const double> t_grid, std::uint64_t seed,
                                                    const ToleranceProfile& tol = {}) {
  if (!spec.has_exp()) fail(ErrorCode::Unsupported, spec.name() + " has no exponential map to compare against");
  if (trials < 1 || t_grid.empty()) fail(ErrorCode::InvalidInput, "need at least one trial and one step");
  const GeometryContext ctx{tol, nullptr};
  Rng rng(seed);
  GeometryReport report;
  double cbar = 0.0;
  std::vector<double> log_t, log_gap;
  for (int k = 0; k < trials; ++k) {
    const Point x = random_point(spec, rng);
    const Tangent u = random_tangent(spec, x, rng, 1.0, ctx);
    for (double t : t_grid) {
      const Tangent tu = scaled(u, t);
      const Point z = retract(spec, x, tu, ctx);
      const double len = norm(spec, tu, ctx);
      const double d = dist(spec, x, z, ctx);
      const Tangent back = log(spec, x, z, ctx);
      const Tangent diff{x, back.data - tu.data};
      const double gap = norm(spec, diff, ctx);
      cbar = std::max(cbar, d * d / (len * len));
      report.max_raw_gap = std::max(report.max_raw_gap, gap);
      ++report.samples;
      if (gap > gap_resolution(spec, len)) {
        report.cR_hat = std::max(report.cR_hat, gap / (len * len));
        log_t.push_back(std::log(t));
        log_gap.push_back(std::log(gap));
        ++report.resolved;
      }
    }
  }
  report.cbar_hat = std::max(1.0, cbar);
  if (log_t.size() >= 2) report.slope = least_squares(log_t, log_gap).slope;
  return report;
}

// ---------------------------------------------------------------------------

/// Checks, for a_1 > 0 and a_t >= 0,
///   (sum a)^{1-alpha} <= sum_t a_t / (sum_{k<=t} a_k)^alpha <= (sum a)^{1-alpha} / (1-alpha)
/// for alpha in (0, 1), and the middle term <= 1 + log(sum a / a_1) at alpha = 1.
inline bool check_adaptive_sum_inequality(std::span<const double> a, double alpha) {
  if (a.empty()) fail(ErrorCode::InvalidInput, "sequence must be non-empty");
  if (!(a[0] > 0.0)) fail(ErrorCode::InvalidInput, "a_1 must be > 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorCode::InvalidInput, "alpha must lie in (0, 1]");
  for (double v : a)
    if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorCode::InvalidInput, "entries must be finite and >= 0");

  double prefix = 0.0;
  double middle = 0.0;
  for (double v : a) {
    prefix += v;
    middle += v / std::pow(prefix, alpha);
  }
  const double total = prefix;

  if (alpha == 1.0) {
    const double upper = 1.0 + std::log(total / a[0]);
    return upper - middle >= -1e-12 * std::max(1.0, upper);
  }
  const double lower = std::pow(total, 1.0 - alpha);
  const double upper = lower / (1.0 - alpha);
  const double scale = std::max({1.0, std::abs(middle), upper});
  return middle - lower >= -1e-12 * scale && upper - middle >= -1e-12 * scale;
}

// ---------------------------------------------------------------------------

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 1.0;
  /// (log T, log value)
  std::vector<std::pair<double, double>> points;
};

/// Least-squares power-law exponent of `value` against budget `T`.
inline SlopeFit fit_rate(std::span<const std::pair<double, double>> budget_values) {
  if (budget_values.size() < 4) fail(ErrorCode::InsufficientData, "need at least 4 budgets");
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  SlopeFit fit;
  std::vector<double> xs, ys;
  for (const auto& [t, v] : budget_values) {
    if (!(t > 0.0) || !(v > 0.0) || !std::isfinite(v))
      fail(ErrorCode::InvalidInput, "budgets and values must be positive and finite");
    lo = std::min(lo, t);
    hi = std::max(hi, t);
    xs.push_back(std::log(t));
    ys.push_back(std::log(v));
    fit.points.emplace_back(xs.back(), ys.back());
  }
  if (std::log10(hi / lo) < 2.0 - 1e-9) fail(ErrorCode::InsufficientData, "budgets must span >= 2 decades");
  const LineFit line = least_squares(xs, ys);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.r2 = line.r2;
  return fit;
}

// ---------------------------------------------------------------------------

/// max |<Gu, Gv>_y - <u, v>_x| / (1 + |<u, v>_x|) over random x, y, u, v.
inline double audit_transport_isometry(const ManifoldSpec& spec, int trials, std::uint64_t seed,
                                       const ToleranceProfile& tol = {}) {
  if (!spec.has_exp())
    fail(ErrorCode::Unsupported, spec.name() + " only has projection transport, which is not an isometry");
  const GeometryContext ctx{tol, nullptr};
  Rng rng(seed);
  std::uniform_real_distribution<double> length(0.1, 2.0);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const Point x = random_point(spec, rng);
    const Point y = random_point(spec, rng);
    const Tangent u = random_tangent(spec, x, rng, length(rng), ctx);
    const Tangent v = random_tangent(spec, x, rng, length(rng), ctx);
    const double before = inner(spec, u, v, ctx);
    const double after = inner(spec, transport(spec, x, y, u, ctx), transport(spec, x, y, v, ctx), ctx);
    worst = std::max(worst, std::abs(after - before) / (1.0 + std::abs(before)));
  }
  return worst;
}

}  // namespace ragda::verify
