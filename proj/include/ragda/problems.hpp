#pragma once

// Minimax objectives f(x, y) on M_x x M_y with exact and sampled Riemannian
// gradient oracles. x is minimised, y is maximised.

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ragda/error.hpp"
#include "ragda/manifold.hpp"
#include "ragda/spd.hpp"

namespace ragda {

using Rng = std::mt19937_64;

/// Indices of the samples (rows) that make up one stochastic oracle call.
struct Batch {
  std::vector<Index> indices;
};

inline Batch full_batch(Index n) {
  Batch b;
  b.indices.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) b.indices[static_cast<std::size_t>(i)] = i;
  return b;
}

/// Uniform sampling with replacement.
inline Batch sample_batch(Index n, Index size, Rng& rng) {
  if (size < 1) fail(ErrorCode::EmptyBatch, "batch size must be >= 1");
  std::uniform_int_distribution<Index> pick(0, n - 1);
  Batch b;
  b.indices.reserve(static_cast<std::size_t>(size));
  for (Index i = 0; i < size; ++i) b.indices.push_back(pick(rng));
  return b;
}

struct InnerMax {
  Point y_star;
  double phi;
};

class MinimaxProblem {
 public:
  virtual ~MinimaxProblem() = default;

  virtual const ManifoldSpec& mx() const = 0;
  virtual const ManifoldSpec& my() const = 0;
  /// Number of samples a Batch indexes into; 1 for problems without data.
  virtual Index sample_count() const = 0;
  virtual std::string name() const = 0;

  double value(const Point& x, const Point& y, ClampCounter* clamps = nullptr) const {
    return do_value(x, y, clamps);
  }
  Tangent grad_x(const Point& x, const Point& y, ClampCounter* clamps = nullptr) const {
    return do_grad_x(x, y, clamps);
  }
  Tangent grad_y(const Point& x, const Point& y, ClampCounter* clamps = nullptr) const {
    return do_grad_y(x, y, clamps);
  }
  Tangent stoch_grad_x(const Point& x, const Point& y, const Batch& batch, Rng& rng,
                       ClampCounter* clamps = nullptr) const {
    check_batch(batch);
    return do_stoch_grad_x(x, y, batch, rng, clamps);
  }
  Tangent stoch_grad_y(const Point& x, const Point& y, const Batch& batch, Rng& rng,
                       ClampCounter* clamps = nullptr) const {
    check_batch(batch);
    return do_stoch_grad_y(x, y, batch, rng, clamps);
  }

  /// Closed-form maximiser y*(x) and Phi(x) = f(x, y*(x)).
  virtual InnerMax inner_max(const Point& /*x*/) const {
    fail(ErrorCode::Unsupported, name() + " has no closed-form inner maximiser");
  }

  /// Starting pair drawn from `rng`.
  virtual std::pair<Point, Point> initial_point(Rng& rng) const = 0;

  const ToleranceProfile& tolerances() const { return tol_; }

 protected:
  explicit MinimaxProblem(ToleranceProfile tol) : tol_(tol) {}

  GeometryContext ctx(ClampCounter* clamps) const { return {tol_, clamps}; }

  void check_batch(const Batch& batch) const {
    if (batch.indices.empty()) fail(ErrorCode::EmptyBatch, "empty batch");
    for (Index i : batch.indices)
      if (i < 0 || i >= sample_count())
        fail(ErrorCode::InvalidInput, "batch index " + std::to_string(i) + " out of range");
  }

  virtual double do_value(const Point& x, const Point& y, ClampCounter* clamps) const = 0;
  virtual Tangent do_grad_x(const Point& x, const Point& y, ClampCounter* clamps) const = 0;
  virtual Tangent do_grad_y(const Point& x, const Point& y, ClampCounter* clamps) const = 0;
  virtual Tangent do_stoch_grad_x(const Point& x, const Point& y, const Batch&, Rng&,
                                  ClampCounter* clamps) const {
    return do_grad_x(x, y, clamps);
  }
  virtual Tangent do_stoch_grad_y(const Point& x, const Point& y, const Batch&, Rng&,
                                  ClampCounter* clamps) const {
    return do_grad_y(x, y, clamps);
  }

 private:
  ToleranceProfile tol_;
};

// ---------------------------------------------------------------------------

/// Regularised robust maximum-likelihood estimation:
///
///   min_{x in S^d} max_{Y in SPD(d+1)}
///     -(n/2) log det Y - 1/2 sum_i (z_i - x)^T Y^-1 (z_i - x) + c d^2(Y, I)
///
/// with z_i = [a_i; 1]. The sampled objective for row i keeps the log-det
/// and regulariser in full and carries n times row i's quadratic term, so
/// the average over rows is exactly f.
class RobustMleProblem final : public MinimaxProblem {
 public:
  RobustMleProblem(Eigen::MatrixXd data, double c, ToleranceProfile tol = {})
      : MinimaxProblem(tol),
        a_(std::move(data)),
        c_(c),
        mx_(ManifoldSpec::sphere(a_.cols() + 1, 1.0)),
        my_(ManifoldSpec::spd(a_.cols() + 1)) {
    if (a_.rows() < 1 || a_.cols() < 1) fail(ErrorCode::InvalidInput, "data matrix must be non-empty");
    if (!a_.allFinite()) fail(ErrorCode::InvalidInput, "data matrix has non-finite entries");
    if (!std::isfinite(c_)) fail(ErrorCode::InvalidInput, "regularisation weight must be finite");
    z_.resize(a_.cols() + 1, a_.rows());
    z_.topRows(a_.cols()) = a_.transpose();
    z_.row(a_.cols()).setOnes();
  }

  const ManifoldSpec& mx() const override { return mx_; }
  const ManifoldSpec& my() const override { return my_; }
  Index sample_count() const override { return a_.rows(); }
  std::string name() const override { return "robust-mle"; }

  const Eigen::MatrixXd& data() const { return a_; }
  double reg() const { return c_; }
  Index dim() const { return a_.cols(); }
  Index samples() const { return a_.rows(); }

  std::pair<Point, Point> initial_point(Rng& rng) const override {
    return {random_point(mx_, rng), Point{flatten(Eigen::MatrixXd::Identity(dim() + 1, dim() + 1))}};
  }

 private:
  double weight(const Batch& b) const {
    return static_cast<double>(samples()) / static_cast<double>(b.indices.size());
  }

  Eigen::MatrixXd residuals(const Point& x, const Batch& b) const {
    Eigen::MatrixXd r(dim() + 1, static_cast<Index>(b.indices.size()));
    for (std::size_t k = 0; k < b.indices.size(); ++k)
      r.col(static_cast<Index>(k)) = z_.col(b.indices[k]) - x.data;
    return r;
  }

  spd::SymEig eig_y(const Point& y, ClampCounter* clamps) const {
    auto e = spd::eig(as_matrix(my_, y.data));
    spd::clamp_floor(e, tolerances().eig_floor, clamps);
    return e;
  }

  double batch_value(const Point& x, const Point& y, const Batch& b, ClampCounter* clamps) const {
    const auto e = eig_y(y, clamps);
    const double n = static_cast<double>(samples());
    const double logdet = e.values.array().log().sum();
    const double reg = e.values.array().log().square().sum();
    const Eigen::MatrixXd r = residuals(x, b);
    // Y^-1/2 r, column by column.
    const Eigen::MatrixXd w = e.values.array().rsqrt().matrix().asDiagonal() * (e.vectors.transpose() * r);
    const double quad = w.squaredNorm();
    const double out = -0.5 * n * logdet - 0.5 * weight(b) * quad + c_ * reg;
    if (!std::isfinite(out)) fail(ErrorCode::NumericalOverflow, "robust-mle value is not finite");
    return out;
  }

  Tangent batch_grad_x(const Point& x, const Point& y, const Batch& b, ClampCounter* clamps) const {
    const auto e = eig_y(y, clamps);
    const Eigen::VectorXd rsum = residuals(x, b).rowwise().sum();
    const Eigen::VectorXd yinv_r =
        e.vectors * (e.values.array().inverse().matrix().asDiagonal() * (e.vectors.transpose() * rsum));
    // f has -1/2 r^T Y^-1 r with r = z - x, so df/dx = +Y^-1 r.
    return project_tangent(mx_, x, weight(b) * yinv_r);
  }

  Tangent batch_grad_y(const Point& x, const Point& y, const Batch& b, ClampCounter* clamps) const {
    const Eigen::MatrixXd ym = as_matrix(my_, y.data);
    const double n = static_cast<double>(samples());
    const Eigen::MatrixXd r = residuals(x, b);
    // Affine-invariant gradient Y sym(G) Y of the Euclidean partial
    // G = -(n/2) Y^-1 + (w/2) Y^-1 R R^T Y^-1, plus c * 2 Y log(Y).
    Eigen::MatrixXd g = -0.5 * n * ym + 0.5 * weight(b) * (r * r.transpose());
    if (c_ != 0.0) g += 2.0 * c_ * spd::x_logm(ym, tolerances().eig_floor, clamps);
    return {y, flatten(spd::sym(g))};
  }

  double do_value(const Point& x, const Point& y, ClampCounter* clamps) const override {
    return batch_value(x, y, full_batch(samples()), clamps);
  }
  Tangent do_grad_x(const Point& x, const Point& y, ClampCounter* clamps) const override {
    return batch_grad_x(x, y, full_batch(samples()), clamps);
  }
  Tangent do_grad_y(const Point& x, const Point& y, ClampCounter* clamps) const override {
    return batch_grad_y(x, y, full_batch(samples()), clamps);
  }
  Tangent do_stoch_grad_x(const Point& x, const Point& y, const Batch& b, Rng&,
                          ClampCounter* clamps) const override {
    return batch_grad_x(x, y, b, clamps);
  }
  Tangent do_stoch_grad_y(const Point& x, const Point& y, const Batch& b, Rng&,
                          ClampCounter* clamps) const override {
    return batch_grad_y(x, y, b, clamps);
  }

  Eigen::MatrixXd a_;
  Eigen::MatrixXd z_;
  double c_;
  ManifoldSpec mx_;
  ManifoldSpec my_;
};

/// Value of the sampled objective for one batch (mean of per-row objectives).
/// Exposed for tests of the unbiasedness construction.
inline double robust_mle_batch_value(const RobustMleProblem& p, const Point& x, const Point& y,
                                     const Batch& b) {
  const auto e = spd::eig(as_matrix(p.my(), y.data));
  const double n = static_cast<double>(p.samples());
  double quad = 0.0;
  const Eigen::MatrixXd yinv =
      e.vectors * e.values.array().inverse().matrix().asDiagonal() * e.vectors.transpose();
  for (Index i : b.indices) {
    Eigen::VectorXd z(p.dim() + 1);
    z << p.data().row(i).transpose(), 1.0;
    const Eigen::VectorXd r = z - x.data;
    quad += r.dot(yinv * r);
  }
  const double logdet = e.values.array().log().sum();
  const double reg = e.values.array().log().square().sum();
  return -0.5 * n * logdet - 0.5 * n * quad / static_cast<double>(b.indices.size()) + p.reg() * reg;
}

// ---------------------------------------------------------------------------

/// f(x, y) = <A x, y> - (mu/2) |y|^2 + <b, x>, x on the unit sphere S^{k-1},
/// y in R^m. Strongly concave in y with y*(x) = A x / mu.
///
/// The sampled oracle adds isotropic Gaussian noise of standard deviation
/// sigma (averaged over the batch) to the ambient gradient before the
/// tangent projection.
class SyntheticQuadratic final : public MinimaxProblem {
 public:
  SyntheticQuadratic(Eigen::MatrixXd coupling, double mu, Eigen::VectorXd linear, double sigma = 0.1,
                     ToleranceProfile tol = {})
      : MinimaxProblem(tol),
        a_(std::move(coupling)),
        b_(std::move(linear)),
        mu_(mu),
        sigma_(sigma),
        mx_(ManifoldSpec::sphere(a_.cols(), 1.0)),
        my_(ManifoldSpec::euclidean(a_.rows())) {
    if (!(mu_ > 0.0)) fail(ErrorCode::InvalidInput, "mu must be > 0");
    if (!(sigma_ >= 0.0)) fail(ErrorCode::InvalidInput, "sigma must be >= 0");
    if (b_.size() != a_.cols()) fail(ErrorCode::InvalidInput, "b must have k entries");
    if (!a_.allFinite() || !b_.allFinite()) fail(ErrorCode::InvalidInput, "non-finite coefficients");
  }

  const ManifoldSpec& mx() const override { return mx_; }
  const ManifoldSpec& my() const override { return my_; }
  Index sample_count() const override { return 1; }
  std::string name() const override { return "synthetic-quadratic"; }

  const Eigen::MatrixXd& coupling() const { return a_; }
  const Eigen::VectorXd& linear() const { return b_; }
  double mu() const { return mu_; }
  double sigma() const { return sigma_; }

  InnerMax inner_max(const Point& x) const override {
    const Eigen::VectorXd ax = a_ * x.data;
    return {Point{ax / mu_}, ax.squaredNorm() / (2.0 * mu_) + b_.dot(x.data)};
  }

  std::pair<Point, Point> initial_point(Rng& rng) const override {
    return {random_point(mx_, rng), Point{Eigen::VectorXd::Zero(a_.rows())}};
  }

 private:
  Eigen::VectorXd noise(Index dim, std::size_t draws, Rng& rng) const {
    std::normal_distribution<double> normal(0.0, sigma_);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
    for (std::size_t k = 0; k < draws; ++k)
      for (Index i = 0; i < dim; ++i) acc[i] += normal(rng);
    return acc / static_cast<double>(draws);
  }

  double do_value(const Point& x, const Point& y, ClampCounter*) const override {
    return y.data.dot(a_ * x.data) - 0.5 * mu_ * y.data.squaredNorm() + b_.dot(x.data);
  }
  Tangent do_grad_x(const Point& x, const Point& y, ClampCounter*) const override {
    return project_tangent(mx_, x, a_.transpose() * y.data + b_);
  }
  Tangent do_grad_y(const Point& x, const Point& y, ClampCounter*) const override {
    return {y, a_ * x.data - mu_ * y.data};
  }
  Tangent do_stoch_grad_x(const Point& x, const Point& y, const Batch& b, Rng& rng,
                          ClampCounter*) const override {
    Eigen::VectorXd g = a_.transpose() * y.data + b_;
    if (sigma_ > 0.0) g += noise(g.size(), b.indices.size(), rng);
    return project_tangent(mx_, x, g);
  }
  Tangent do_stoch_grad_y(const Point& x, const Point& y, const Batch& b, Rng& rng,
                          ClampCounter*) const override {
    Eigen::VectorXd g = a_ * x.data - mu_ * y.data;
    if (sigma_ > 0.0) g += noise(g.size(), b.indices.size(), rng);
    return {y, g};
  }

  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  double mu_;
  double sigma_;
  ManifoldSpec mx_;
  ManifoldSpec my_;
};

// ---------------------------------------------------------------------------
// Instance generators. Entries are drawn row by row from a std::mt19937_64
// seeded with `seed`, so a seed pins the instance for a given toolchain.

inline RobustMleProblem generate_gaussian_instance(Index d, Index n, double c, std::uint64_t seed) {
  if (d < 1 || n < 1) fail(ErrorCode::InvalidInput, "robust-mle needs d >= 1 and n >= 1");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = normal(rng);
  return RobustMleProblem(std::move(a), c);
}

/// A = U diag(s) V^T with Haar-random orthonormal U (m x r), V (k x r),
/// r = min(m, k), and singular values s_i log-spaced from 1 down to
/// 10^-spectrum_decades; b = 0. With m < k the minimisers of Phi form a
/// great sphere in ker(A), and the spread of transversal curvatures gives
/// a long sublinear tail instead of a fast linear collapse.
inline SyntheticQuadratic generate_synthetic_quadratic(Index k, Index m, double mu, double sigma,
                                                       std::uint64_t seed, double spectrum_decades = 2.0) {
  if (k < 1 || m < 1) fail(ErrorCode::InvalidInput, "synthetic quadratic needs k, m >= 1");
  if (!(spectrum_decades >= 0.0)) fail(ErrorCode::InvalidInput, "spectrum_decades must be >= 0");
  Rng rng(seed);
  const Index r = std::min(k, m);
  const Eigen::MatrixXd u = detail::qr_positive(detail::gaussian(m * r, rng).reshaped(m, r), 0.0);
  const Eigen::MatrixXd v = detail::qr_positive(detail::gaussian(k * r, rng).reshaped(k, r), 0.0);
  Eigen::VectorXd s(r);
  for (Index i = 0; i < r; ++i)
    s[i] = r == 1 ? 1.0 : std::pow(10.0, -spectrum_decades * static_cast<double>(i) / static_cast<double>(r - 1));
  Eigen::MatrixXd a = u * s.asDiagonal() * v.transpose();
  return SyntheticQuadratic(std::move(a), mu, Eigen::VectorXd::Zero(k), sigma);
}

}  // namespace ragda
