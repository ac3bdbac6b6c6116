#include <gtest/gtest.h>

#include <cmath>

#include "ragda/solvers.hpp"
#include "test_util.hpp"

using namespace ragda;
using Eigen::VectorXd;

namespace {

/// f(x, y) = x y - y^2 / 2 on R x R.
class Bilinear1d final : public MinimaxProblem {
 public:
  Bilinear1d() : MinimaxProblem(ToleranceProfile{}) {}

  const ManifoldSpec& mx() const override { return m_; }
  const ManifoldSpec& my() const override { return m_; }
  Index sample_count() const override { return 1; }
  std::string name() const override { return "bilinear-1d"; }
  std::pair<Point, Point> initial_point(Rng&) const override { return {one(1.0), one(0.0)}; }

  static Point one(double v) { return {VectorXd::Constant(1, v)}; }

 private:
  double do_value(const Point& x, const Point& y, ClampCounter*) const override {
    return x.data[0] * y.data[0] - 0.5 * y.data[0] * y.data[0];
  }
  Tangent do_grad_x(const Point& x, const Point& y, ClampCounter*) const override {
    return {x, VectorXd::Constant(1, y.data[0])};
  }
  Tangent do_grad_y(const Point& x, const Point& y, ClampCounter*) const override {
    return {y, VectorXd::Constant(1, x.data[0] - y.data[0])};
  }

  ManifoldSpec m_ = ManifoldSpec::euclidean(1);
};

SolverConfig synthetic_config() {
  SolverConfig cfg;
  cfg.alpha = 0.5;
  cfg.beta = 0.3;
  cfg.eta_x = 0.5;
  cfg.eta_y = 5.0;
  cfg.v0_x = cfg.v0_y = 1e-6;
  return cfg;
}

bool identical(const AdaptiveState& a, const AdaptiveState& b) {
  return a.t == b.t && a.vx == b.vx && a.vy == b.vy && a.x.data == b.x.data && a.y.data == b.y.data;
}

}  // namespace

TEST(RagdaStep, HandComputedScalarStep) {
  const Bilinear1d p;
  SolverConfig cfg;
  cfg.eta_x = cfg.eta_y = 1.0;
  cfg.alpha = cfg.beta = 0.5;
  cfg.v0_x = cfg.v0_y = 1.0;
  StepInfo info;
  const AdaptiveState s = ragda_step(p, initial_state(cfg, Bilinear1d::one(1.0), Bilinear1d::one(0.0)), cfg, &info);
  // g^x = y0 = 0, g^y = x0 - y0 = 1: v^x = 1, v^y = 2, eta = gamma = 2^-1/2.
  EXPECT_EQ(s.vx, 1.0);
  EXPECT_EQ(s.vy, 2.0);
  EXPECT_DOUBLE_EQ(info.eta, 1.0 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(info.gamma, 1.0 / std::sqrt(2.0));
  EXPECT_EQ(s.x.data[0], 1.0);
  EXPECT_DOUBLE_EQ(s.y.data[0], 1.0 / std::sqrt(2.0));
  EXPECT_EQ(s.t, 1);
}

TEST(RagdaStep, AccumulatesBeforeFormingStepsizes) {
  // With stale accumulators the first stepsizes would be eta_x / 1 and eta_y / 1.
  const Bilinear1d p;
  SolverConfig cfg;
  cfg.eta_x = cfg.eta_y = 1.0;
  cfg.alpha = 0.5;
  cfg.beta = 0.25;
  cfg.v0_x = cfg.v0_y = 1.0;
  StepInfo info;
  ragda_step(p, initial_state(cfg, Bilinear1d::one(2.0), Bilinear1d::one(0.0)), cfg, &info);
  EXPECT_DOUBLE_EQ(info.eta, 1.0 / std::pow(5.0, 0.5));
  EXPECT_DOUBLE_EQ(info.gamma, 1.0 / std::pow(5.0, 0.25));
}

TEST(RagdaStep, ZeroGradientIsFixedPoint) {
  const Bilinear1d p;
  const SolverConfig cfg;
  const AdaptiveState s0 = initial_state(cfg, Bilinear1d::one(0.0), Bilinear1d::one(0.0));
  const AdaptiveState s1 = ragda_step(p, s0, cfg);
  EXPECT_EQ(s1.x.data, s0.x.data);
  EXPECT_EQ(s1.y.data, s0.y.data);
  EXPECT_EQ(s1.vx, s0.vx);
  EXPECT_EQ(s1.vy, s0.vy);
  EXPECT_EQ(s1.t, 1);
  EXPECT_EQ(gda_step(p, s0, cfg).x.data, s0.x.data);
  EXPECT_EQ(tsgda_step(p, s0, cfg).y.data, s0.y.data);
}

TEST(RagdaStep, MaxCouplesTheStepsizes) {
  const auto p = generate_synthetic_quadratic(10, 6, 1.0, 0.0, 3);
  SolverConfig cfg = synthetic_config();
  Rng rng(1);
  auto [x0, y0] = p.initial_point(rng);
  y0.data.setConstant(50.0);  // |g^y| >> |g^x|
  AdaptiveState s = initial_state(cfg, x0, y0);
  for (int t = 0; t < 200; ++t) {
    StepInfo info;
    s = ragda_step(p, s, cfg, &info);
    EXPECT_LE(info.eta, cfg.eta_x / std::pow(s.vy, cfg.alpha) * (1.0 + 1e-15));
    EXPECT_LE(info.eta, cfg.eta_x / std::pow(s.vx, cfg.alpha) * (1.0 + 1e-15));
    EXPECT_GE(s.vx, cfg.v0_x);
    EXPECT_GE(s.vy, cfg.v0_y);
  }
}

TEST(Baselines, TsgdaWithEqualStepsIsGda) {
  const auto p = generate_synthetic_quadratic(8, 5, 1.0, 0.0, 2);
  SolverConfig cfg;
  cfg.eta_x = cfg.eta_y = 0.05;
  Rng rng(2);
  auto [x0, y0] = p.initial_point(rng);
  AdaptiveState a = initial_state(cfg, x0, y0);
  AdaptiveState b = a;
  for (int t = 0; t < 50; ++t) {
    a = gda_step(p, a, cfg);
    b = tsgda_step(p, b, cfg);
    ASSERT_TRUE(identical(a, b));
  }
  EXPECT_EQ(a.vx, cfg.v0_x);
  EXPECT_EQ(a.vy, cfg.v0_y);
}

TEST(Baselines, GdaTracksInnerMaximiser) {
  const auto p = generate_synthetic_quadratic(8, 5, 1.0, 0.0, 4);
  SolverConfig cfg;
  cfg.method = Method::Gda;
  cfg.eta_x = cfg.eta_y = 0.01;
  cfg.max_iters = 2000;
  cfg.track_inner_max = true;
  const Trace trace = run(p, cfg);
  ASSERT_EQ(trace.records.size(), 2000u);
  // After burn-in (the last increase on this instance is at t=604) the
  // distance to y*(x_t) keeps shrinking.
  for (std::size_t i = 1000; i < trace.records.size(); ++i)
    EXPECT_LE(*trace.records[i].dist_to_ystar, *trace.records[i - 1].dist_to_ystar * (1.0 + 1e-12));
  EXPECT_LT(*trace.records.back().dist_to_ystar, 1e-2 * *trace.records.front().dist_to_ystar);
}

TEST(Rsagda, ZeroNoiseSingletonMatchesRagda) {
  const auto p = generate_synthetic_quadratic(20, 10, 1.0, 0.0, 1);
  SolverConfig cfg = synthetic_config();
  Rng rng(3);
  auto [x0, y0] = p.initial_point(rng);
  AdaptiveState a = initial_state(cfg, x0, y0);
  AdaptiveState b = a;
  StreamPair streams = make_streams(3);
  for (int t = 0; t < 100; ++t) {
    a = ragda_step(p, a, cfg);
    b = rsagda_step(p, b, cfg, streams);
    ASSERT_TRUE(identical(a, b)) << "step " << t;
  }
}

TEST(Rsagda, FullBatchMatchesRagda) {
  const auto p = generate_gaussian_instance(5, 20, -5.0, 5);
  SolverConfig cfg;
  cfg.batch_size = 20;
  Rng rng(4);
  auto [x0, y0] = p.initial_point(rng);
  AdaptiveState a = initial_state(cfg, x0, y0);
  AdaptiveState b = a;
  StreamPair streams = make_streams(4);
  for (int t = 0; t < 100; ++t) {
    a = ragda_step(p, a, cfg);
    b = rsagda_step(p, b, cfg, streams);
    ASSERT_LE((a.x.data - b.x.data).norm(), 1e-12);
    ASSERT_LE((a.y.data - b.y.data).norm(), 1e-12);
  }
}

TEST(Rsagda, BatchesUseIndependentStreams) {
  const auto p = generate_gaussian_instance(3, 50, -5.0, 6);
  SolverConfig cfg;
  cfg.method = Method::Rsagda;
  cfg.batch_size = 1;
  StreamPair streams = make_streams(9);
  Rng x_only = substream(9, 1);
  Rng y_only = substream(9, 2);
  for (int t = 0; t < 20; ++t) {
    const Batch bx = detail::draw_batch(p, 1, streams.x);
    const Batch by = detail::draw_batch(p, 1, streams.y);
    EXPECT_EQ(bx.indices, sample_batch(50, 1, x_only).indices);
    EXPECT_EQ(by.indices, sample_batch(50, 1, y_only).indices);
  }
}

TEST(Rsagda, SeedPinsTrace) {
  const auto p = generate_synthetic_quadratic(10, 5, 1.0, 0.1, 2);
  SolverConfig cfg = synthetic_config();
  cfg.method = Method::Rsagda;
  cfg.max_iters = 500;
  cfg.seed = 17;
  const Trace a = run(p, cfg);
  const Trace b = run(p, cfg);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].grad_x_norm, b.records[i].grad_x_norm);
    EXPECT_EQ(a.records[i].f_value, b.records[i].f_value);
  }
  EXPECT_TRUE(identical(a.final_state, b.final_state));
}

TEST(Run, ZeroIterations) {
  const auto p = generate_synthetic_quadratic(4, 3, 1.0, 0.0, 1);
  SolverConfig cfg;
  cfg.max_iters = 0;
  const Trace t = run(p, cfg);
  EXPECT_TRUE(t.records.empty());
  EXPECT_EQ(t.stop_reason, StopReason::MaxIters);
  EXPECT_EQ(t.iterations, 0);
}

TEST(Run, ConvergesOnTolerance) {
  const auto p = generate_synthetic_quadratic(6, 6, 1.0, 0.0, 1, 0.0);
  SolverConfig cfg = synthetic_config();
  cfg.grad_tol = 1e-6;
  cfg.max_iters = 100000;
  const Trace t = run(p, cfg);
  EXPECT_EQ(t.stop_reason, StopReason::Converged);
  EXPECT_LE(t.min_stationarity, 1e-6);
  EXPECT_LT(t.iterations, cfg.max_iters);
}

TEST(Run, TraceInvariants) {
  const auto p = generate_gaussian_instance(4, 15, -5.0, 2);
  for (Method m : {Method::Ragda, Method::Rsagda}) {
    SolverConfig cfg;
    cfg.method = m;
    cfg.alpha = 0.6;
    cfg.beta = 0.4;
    cfg.eta_y = 1.0;
    cfg.batch_size = 3;
    cfg.max_iters = 400;
    cfg.seed = 5;
    const Trace t = run(p, cfg);
    ASSERT_EQ(t.stop_reason, StopReason::MaxIters) << t.error;
    double vx = cfg.v0_x, vy = cfg.v0_y;
    for (std::size_t i = 0; i < t.records.size(); ++i) {
      const auto& r = t.records[i];
      EXPECT_EQ(r.t, static_cast<std::int64_t>(i));
      vx += r.grad_x_norm * r.grad_x_norm;
      vy += r.grad_y_norm * r.grad_y_norm;
      EXPECT_NEAR(r.eta_t, cfg.eta_x / std::pow(std::max(vx, vy), cfg.alpha), 1e-14 * r.eta_t);
      EXPECT_NEAR(r.gamma_t, cfg.eta_y / std::pow(vy, cfg.beta), 1e-14 * r.gamma_t);
      if (i > 0) {
        EXPECT_LE(r.eta_t, t.records[i - 1].eta_t);
        EXPECT_LE(r.gamma_t, t.records[i - 1].gamma_t);
      }
    }
    EXPECT_NEAR(vx, t.final_state.vx, 1e-9 * vx);
    EXPECT_NEAR(vy, t.final_state.vy, 1e-9 * vy);
    EXPECT_LE(t.min_stationarity, t.checks.front().value);
  }
}

TEST(Run, RecordStride) {
  const auto p = generate_synthetic_quadratic(4, 3, 1.0, 0.0, 1);
  SolverConfig cfg = synthetic_config();
  cfg.max_iters = 25000;
  const Trace t = run(p, cfg);
  EXPECT_EQ(record_stride(cfg), 3);
  EXPECT_LE(t.records.size(), 10000u);
  EXPECT_EQ(t.checks.size(), 25000u);
}

TEST(Run, RunningMinimumDropsTenfoldOverTwoDecades) {
  const auto p = generate_synthetic_quadratic(20, 10, 1.0, 0.0, 1);
  SolverConfig cfg = synthetic_config();
  cfg.max_iters = 10000;
  const Trace t = run(p, cfg);
  EXPECT_LE(t.running_min_at(10000), 0.1 * t.running_min_at(100));
}

TEST(Run, SyntheticReachesSmallStationarity) {
  const auto p = generate_synthetic_quadratic(20, 10, 1.0, 0.0, 1);
  SolverConfig cfg = synthetic_config();
  cfg.max_iters = 100000;
  cfg.max_records = 10;
  const Trace t = run(p, cfg);
  EXPECT_LE(t.min_stationarity, 1e-3);
  for (std::size_t i = 1; i < t.checks.size(); i += 997)
    EXPECT_LE(t.running_min_at(static_cast<std::int64_t>(i) + 1), t.running_min_at(static_cast<std::int64_t>(i)));
}

TEST(Run, RobustMleReferenceSettingsStayFinite) {
  const auto p = generate_gaussian_instance(30, 100, -5.0, 2025);
  SolverConfig cfg;
  cfg.max_iters = 5000;
  cfg.max_records = 100;
  const Trace t = run(p, cfg);
  EXPECT_EQ(t.stop_reason, StopReason::MaxIters) << t.error;
  EXPECT_EQ(t.iterations, 5000);
  EXPECT_FALSE(t.regime_flags.empty());  // alpha == beta
}

TEST(Run, DivergenceKeepsPartialTrace) {
  const auto p = generate_gaussian_instance(30, 100, -5.0, 2025);
  SolverConfig cfg;
  cfg.method = Method::Tsgda;
  cfg.eta_x = 0.02;
  cfg.eta_y = 0.4;
  cfg.max_iters = 100;
  const Trace t = run(p, cfg);
  EXPECT_EQ(t.stop_reason, StopReason::NumericalError);
  EXPECT_FALSE(t.error.empty());
  EXPECT_LT(t.iterations, 100);
  EXPECT_EQ(t.records.size(), static_cast<std::size_t>(t.iterations));
}

TEST(Run, LargerInitialAccumulatorOnlyChangesStepsizes) {
  const auto p = generate_synthetic_quadratic(10, 5, 1.0, 0.0, 3);
  for (double v0 : {1e-6, 1e-3}) {
    SolverConfig cfg = synthetic_config();
    cfg.v0_x = cfg.v0_y = v0;
    cfg.max_iters = 300;
    const Trace t = run(p, cfg);
    EXPECT_EQ(t.stop_reason, StopReason::MaxIters);
    EXPECT_GE(t.final_state.vx, v0);
    EXPECT_GE(t.final_state.vy, v0);
    EXPECT_TRUE(is_point(p.mx(), t.final_state.x));
  }
}

TEST(Config, ValidationAndRegimes) {
  SolverConfig cfg;
  cfg.alpha = 1.0;
  EXPECT_ERROR_CODE(validate(cfg), ErrorCode::ConfigError);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_ERROR_CODE(validate(cfg), ErrorCode::ConfigError);
  cfg = {};
  cfg.eta_y = -1;
  EXPECT_ERROR_CODE(validate(cfg), ErrorCode::ConfigError);

  cfg = {};
  cfg.alpha = 0.5;
  cfg.beta = 0.3;
  EXPECT_TRUE(regime_flags(cfg).empty());
  cfg.beta = 0.5;
  EXPECT_EQ(regime_flags(cfg).size(), 1u);
  cfg.method = Method::Rsagda;
  cfg.alpha = 2.0 / 3.0;
  cfg.beta = 1.0 / 3.0;
  EXPECT_TRUE(regime_flags(cfg).empty());
  cfg.alpha = cfg.beta = 0.5;
  EXPECT_EQ(regime_flags(cfg).size(), 1u);
  // GDA ignores alpha/beta entirely.
  cfg.method = Method::Gda;
  cfg.alpha = 5.0;
  EXPECT_NO_THROW(validate(cfg));
  EXPECT_EQ(parse_method("tsgda"), Method::Tsgda);
  EXPECT_ERROR_CODE(parse_method("adam"), ErrorCode::ConfigError);
}

TEST(Stationarity, Examples) {
  const auto p = generate_synthetic_quadratic(6, 4, 1.0, 0.0, 5);
  Rng rng(6);
  const Point x = random_point(p.mx(), rng);
  const auto star = p.inner_max(x);
  EXPECT_LE(stationarity(p, x, star.y_star).second, 1e-12);
  const Point y = random_point(p.my(), rng);
  const auto [sx, sy] = stationarity(p, x, y);
  EXPECT_EQ(sx, norm(p.mx(), p.grad_x(x, y)));
  EXPECT_EQ(sy, norm(p.my(), p.grad_y(x, y)));
  const Bilinear1d b;
  const auto zero = stationarity(b, Bilinear1d::one(0.0), Bilinear1d::one(0.0));
  EXPECT_EQ(zero.first, 0.0);
  EXPECT_EQ(zero.second, 0.0);
}
