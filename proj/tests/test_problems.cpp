#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ragda/problems.hpp"
#include "ragda/verification/oracles.hpp"
#include "test_util.hpp"

using namespace ragda;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Point identity_point(Index n) { return {flatten(MatrixXd::Identity(n, n))}; }

Batch singleton(Index i) { return Batch{{i}}; }

}  // namespace

TEST(Batch, Validation) {
  const auto p = generate_gaussian_instance(2, 4, -1.0, 1);
  Rng rng(0);
  const Point x = random_point(p.mx(), rng);
  const Point y = identity_point(3);
  EXPECT_ERROR_CODE(p.stoch_grad_x(x, y, Batch{}, rng), ErrorCode::EmptyBatch);
  EXPECT_ERROR_CODE(p.stoch_grad_y(x, y, Batch{{4}}, rng), ErrorCode::InvalidInput);
  const Batch b = sample_batch(4, 100, rng);
  EXPECT_EQ(b.indices.size(), 100u);
  for (Index i : b.indices) EXPECT_TRUE(i >= 0 && i < 4);
}

TEST(RobustMle, ValueExamples) {
  // A = 0, x = e3: every z_i = (0, 0, 1) = x, log det I = 0, d(I, I) = 0.
  const RobustMleProblem zero(MatrixXd::Zero(2, 2), -5.0);
  EXPECT_EQ(zero.value(Point{VectorXd::Unit(3, 2)}, identity_point(3)), 0.0);

  // At Y = I only the quadratic term survives, whatever c is.
  const auto p = generate_gaussian_instance(3, 6, -5.0, 4);
  const auto q = RobustMleProblem(p.data(), 7.0);
  Rng rng(2);
  const Point x = random_point(p.mx(), rng);
  double quad = 0.0;
  for (Index i = 0; i < 6; ++i) {
    VectorXd z(4);
    z << p.data().row(i).transpose(), 1.0;
    quad += (z - x.data).squaredNorm();
  }
  EXPECT_NEAR(p.value(x, identity_point(4)), -0.5 * quad, 1e-12);
  EXPECT_NEAR(q.value(x, identity_point(4)), -0.5 * quad, 1e-12);
}

TEST(RobustMle, ValueMatchesScalarOracle) {
  const auto p = generate_gaussian_instance(2, 5, -5.0, 8);
  Rng rng(3);
  const Point x = random_point(p.mx(), rng);
  const Point y = random_point(p.my(), rng);
  const MatrixXd ym = as_matrix(p.my(), y.data);
  const Eigen::SelfAdjointEigenSolver<MatrixXd> es(ym);
  const double logdet = es.eigenvalues().array().log().sum();
  const double d2 = es.eigenvalues().array().log().square().sum();
  double quad = 0.0;
  for (Index i = 0; i < 5; ++i) {
    VectorXd r(3);
    r << p.data().row(i).transpose(), 1.0;
    r -= x.data;
    quad += r.dot(ym.ldlt().solve(r));
  }
  EXPECT_NEAR(p.value(x, y), -2.5 * logdet - 0.5 * quad - 5.0 * d2, 1e-10);
}

TEST(RobustMle, GradYAtIdentityWithoutRegulariser) {
  const auto base = generate_gaussian_instance(3, 7, 0.0, 5);
  Rng rng(4);
  const Point x = random_point(base.mx(), rng);
  MatrixXd s = -3.5 * MatrixXd::Identity(4, 4);
  for (Index i = 0; i < 7; ++i) {
    VectorXd r(4);
    r << base.data().row(i).transpose(), 1.0;
    r -= x.data;
    s += 0.5 * r * r.transpose();
  }
  const Tangent g = base.grad_y(x, identity_point(4));
  EXPECT_LT((g.data - project_tangent(base.my(), identity_point(4), flatten(s)).data).norm(), 1e-12);
}

TEST(RobustMle, GradientsMatchFiniteDifferences) {
  const auto p = generate_gaussian_instance(3, 10, -5.0, 6);
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const Point x = random_point(p.mx(), rng);
    const Point y = random_point(p.my(), rng);
    const Tangent gx = p.grad_x(x, y);
    const Tangent gy = p.grad_y(x, y);
    EXPECT_TRUE(is_tangent(p.mx(), gx));
    EXPECT_TRUE(is_tangent(p.my(), gy));
    const Tangent ux = random_tangent(p.mx(), x, rng, 1.0);
    const Tangent uy = random_tangent(p.my(), y, rng, 1.0);
    const double ax = inner(p.mx(), gx, ux);
    const double ay = inner(p.my(), gy, uy);
    EXPECT_LE(std::abs(ax - verify::finite_diff_directional(p, x, y, ux, verify::Wrt::X, 1e-5)),
              1e-5 * (1.0 + std::abs(ax)));
    EXPECT_LE(std::abs(ay - verify::finite_diff_directional(p, x, y, uy, verify::Wrt::Y, 1e-5)),
              1e-5 * (1.0 + std::abs(ay)));
  }
}

TEST(RobustMle, FullBatchEqualsExact) {
  const auto p = generate_gaussian_instance(4, 9, -5.0, 7);
  Rng rng(6);
  const Point x = random_point(p.mx(), rng);
  const Point y = random_point(p.my(), rng);
  const Batch all = full_batch(9);
  EXPECT_LE((p.stoch_grad_x(x, y, all, rng).data - p.grad_x(x, y).data).norm(), 1e-12);
  EXPECT_LE((p.stoch_grad_y(x, y, all, rng).data - p.grad_y(x, y).data).norm(), 1e-12);
  EXPECT_NEAR(robust_mle_batch_value(p, x, y, all), p.value(x, y), 1e-10 * std::abs(p.value(x, y)));
}

TEST(RobustMle, SingletonBatchesAverageToExact) {
  const auto p = generate_gaussian_instance(3, 12, -5.0, 9);
  Rng rng(7);
  const Point x = random_point(p.mx(), rng);
  const Point y = random_point(p.my(), rng);
  VectorXd gx = VectorXd::Zero(4);
  VectorXd gy = VectorXd::Zero(16);
  double f = 0.0;
  for (Index i = 0; i < 12; ++i) {
    gx += p.stoch_grad_x(x, y, singleton(i), rng).data / 12.0;
    gy += p.stoch_grad_y(x, y, singleton(i), rng).data / 12.0;
    f += robust_mle_batch_value(p, x, y, singleton(i)) / 12.0;
  }
  const VectorXd ex = p.grad_x(x, y).data;
  const VectorXd ey = p.grad_y(x, y).data;
  EXPECT_LE((gx - ex).norm(), 1e-10 * std::max(1.0, ex.norm()));
  EXPECT_LE((gy - ey).norm(), 1e-10 * std::max(1.0, ey.norm()));
  EXPECT_NEAR(f, p.value(x, y), 1e-10 * std::max(1.0, std::abs(f)));
}

TEST(RobustMle, Construction) {
  EXPECT_ERROR_CODE(RobustMleProblem(MatrixXd::Constant(2, 2, std::nan("")), -5.0), ErrorCode::InvalidInput);
  const auto a = generate_gaussian_instance(30, 100, -5.0, 42);
  const auto b = generate_gaussian_instance(30, 100, -5.0, 42);
  EXPECT_EQ(a.data(), b.data());
  EXPECT_EQ(a.mx(), ManifoldSpec::sphere(31));
  EXPECT_EQ(a.my(), ManifoldSpec::spd(31));
  EXPECT_EQ(a.reg(), -5.0);
  const auto single = generate_gaussian_instance(4, 1, -5.0, 1);
  EXPECT_EQ(single.samples(), 1);
  Rng rng(0);
  const auto [x0, y0] = single.initial_point(rng);
  EXPECT_TRUE(std::isfinite(single.value(x0, y0)));
}

TEST(SyntheticQuadratic, ValueAndGradientExamples) {
  const auto p = generate_synthetic_quadratic(6, 4, 2.0, 0.0, 3);
  Rng rng(1);
  const Point x = random_point(p.mx(), rng);
  EXPECT_EQ(p.value(x, Point{VectorXd::Zero(4)}), 0.0);
  const auto star = p.inner_max(x);
  EXPECT_LE(p.grad_y(x, star.y_star).data.norm(), 1e-12);
  EXPECT_NEAR(star.phi, p.value(x, star.y_star), 1e-12);

  // b parallel to x and y = 0: the projected gradient vanishes.
  const SyntheticQuadratic q(p.coupling(), 2.0, 3.0 * x.data, 0.0);
  EXPECT_LE(q.grad_x(x, Point{VectorXd::Zero(4)}).data.norm(), 1e-15);
}

TEST(SyntheticQuadratic, InnerMaxClosedForm) {
  const SyntheticQuadratic zero(MatrixXd::Zero(3, 5), 1.5, VectorXd::LinSpaced(5, 1.0, 2.0), 0.0);
  Rng rng(2);
  const Point x = random_point(zero.mx(), rng);
  const auto s = zero.inner_max(x);
  EXPECT_EQ(s.y_star.data.norm(), 0.0);
  EXPECT_NEAR(s.phi, zero.linear().dot(x.data), 1e-15);

  const auto p = generate_synthetic_quadratic(8, 5, 1e6, 0.0, 4);
  const Point x8 = random_point(p.mx(), rng);
  EXPECT_NEAR(p.inner_max(x8).y_star.data.norm(), (p.coupling() * x8.data).norm() / 1e6, 1e-20);
}

TEST(SyntheticQuadratic, InnerMaxIsLipschitz) {
  const auto p = generate_synthetic_quadratic(10, 6, 0.7, 0.0, 5);
  const double kappa = Eigen::JacobiSVD<MatrixXd>(p.coupling()).singularValues()[0] / p.mu();
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const Point a = random_point(p.mx(), rng);
    const Point b = random_point(p.mx(), rng);
    EXPECT_LE(dist(p.my(), p.inner_max(a).y_star, p.inner_max(b).y_star), kappa * dist(p.mx(), a, b) + 1e-12);
  }
}

TEST(SyntheticQuadratic, StronglyConcaveInY) {
  const auto p = generate_synthetic_quadratic(7, 4, 1.3, 0.0, 6);
  Rng rng(4);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 50; ++k) {
    const Point x = random_point(p.mx(), rng);
    VectorXd y(4), v(4);
    for (Index i = 0; i < 4; ++i) {
      y[i] = normal(rng);
      v[i] = normal(rng);
    }
    const double h = 0.1;
    const double second = (p.value(x, Point{y + h * v}) - 2.0 * p.value(x, Point{y}) + p.value(x, Point{y - h * v})) /
                          (h * h);
    EXPECT_LE(second, -p.mu() * v.squaredNorm() + 1e-9);
  }
}

TEST(SyntheticQuadratic, GradientsMatchFiniteDifferences) {
  const auto p = generate_synthetic_quadratic(20, 10, 1.0, 0.0, 7);
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const Point x = random_point(p.mx(), rng);
    const Point y = random_point(p.my(), rng);
    const Tangent ux = random_tangent(p.mx(), x, rng, 1.0);
    const Tangent uy = random_tangent(p.my(), y, rng, 1.0);
    const double ax = inner(p.mx(), p.grad_x(x, y), ux);
    const double ay = inner(p.my(), p.grad_y(x, y), uy);
    EXPECT_LE(std::abs(ax - verify::finite_diff_directional(p, x, y, ux, verify::Wrt::X, 1e-5)),
              1e-4 * (1.0 + std::abs(ax)));
    EXPECT_LE(std::abs(ay - verify::finite_diff_directional(p, x, y, uy, verify::Wrt::Y, 1e-5)),
              1e-4 * (1.0 + std::abs(ay)));
  }
}

TEST(SyntheticQuadratic, NoisyOracleIsUnbiased) {
  const double sigma = 0.1;
  const auto p = generate_synthetic_quadratic(5, 3, 1.0, sigma, 8);
  Rng rng(6);
  const Point x = random_point(p.mx(), rng);
  const Point y{VectorXd::LinSpaced(3, -1.0, 1.0)};
  const int draws = 10000;
  VectorXd mx = VectorXd::Zero(5), my = VectorXd::Zero(3);
  for (int k = 0; k < draws; ++k) {
    mx += p.stoch_grad_x(x, y, singleton(0), rng).data / draws;
    my += p.stoch_grad_y(x, y, singleton(0), rng).data / draws;
  }
  const double band = 4.0 * sigma / std::sqrt(static_cast<double>(draws));
  EXPECT_LE((mx - p.grad_x(x, y).data).cwiseAbs().maxCoeff(), band);
  EXPECT_LE((my - p.grad_y(x, y).data).cwiseAbs().maxCoeff(), band);
}

TEST(SyntheticQuadratic, ZeroNoiseOracleIsExact) {
  const auto p = generate_synthetic_quadratic(5, 3, 1.0, 0.0, 8);
  Rng rng(7);
  const Point x = random_point(p.mx(), rng);
  const Point y{VectorXd::Ones(3)};
  EXPECT_EQ(p.stoch_grad_x(x, y, singleton(0), rng).data, p.grad_x(x, y).data);
  EXPECT_EQ(p.stoch_grad_y(x, y, singleton(0), rng).data, p.grad_y(x, y).data);
}

TEST(SyntheticQuadratic, RejectsBadParameters) {
  EXPECT_ERROR_CODE(SyntheticQuadratic(MatrixXd::Ones(2, 3), 0.0, VectorXd::Zero(3)), ErrorCode::InvalidInput);
  EXPECT_ERROR_CODE(SyntheticQuadratic(MatrixXd::Ones(2, 3), 1.0, VectorXd::Zero(2)), ErrorCode::InvalidInput);
  EXPECT_ERROR_CODE(SyntheticQuadratic(MatrixXd::Ones(2, 3), 1.0, VectorXd::Zero(3), -1.0), ErrorCode::InvalidInput);
  const auto p = generate_gaussian_instance(2, 3, -5.0, 1);
  Rng rng(0);
  EXPECT_ERROR_CODE(p.inner_max(random_point(p.mx(), rng)), ErrorCode::Unsupported);
}
