#pragma once

// Geometry kernels for the manifolds used by the solvers.
//
// Storage conventions (flat, column-major where a matrix is meant):
//   Euclidean(m)      m entries
//   Sphere(d, r)      d entries, |x| = r
//   Stiefel(n, p)     n*p entries, X^T X = I_p
//   SPD(n)            n*n entries, symmetric positive definite
//   Product(M1..Mk)   concatenation of the factors in order
//
// The SPD factor uses the affine-invariant metric <U,V>_X = tr(X^-1 U X^-1 V)
// and its exponential map as retraction. Stiefel only has the QR retraction
// and projection transport; exp/log there raise Unsupported.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ragda/error.hpp"
#include "ragda/spd.hpp"

namespace ragda {

using Index = Eigen::Index;

/// Default numerical tolerances for every geometry check. A single value
/// of this struct overrides all of them at once.
struct ToleranceProfile {
  double sphere_norm = 1e-10;      // |x| = r, relative to r
  double sphere_tangent = 1e-10;   // <x,u> = 0, relative to r|u|
  double stiefel_orth = 1e-10;     // |X^T X - I|_F
  double stiefel_tangent = 1e-10;  // |X^T U + U^T X|_F, relative to max(1,|U|)
  double spd_symmetry = 1e-12;     // relative to max(1, max|X_ij|)
  double base_match = 1e-12;       // elementwise, relative to 1 + |x_i|
  double degenerate_norm = 1e-14;  // |x + u| on the sphere
  double antipodal = 1e-10;        // <x,y>/r^2 <= -1 + antipodal
  double qr_rank = 1e-12;          // |R_ii| relative to |x + u|_F
  double eig_floor = 1e-14;        // eigenvalue clamp, relative to max
};

struct GeometryContext {
  ToleranceProfile tol{};
  ClampCounter* clamps = nullptr;
};

enum class ManifoldKind { Euclidean, Sphere, Stiefel, Spd, Product };

class ManifoldSpec {
 public:
  static ManifoldSpec euclidean(Index m) {
    if (m < 1) fail(ErrorCode::InvalidSpec, "Euclidean dimension must be >= 1");
    ManifoldSpec s(ManifoldKind::Euclidean);
    s.rows_ = m;
    s.cols_ = 1;
    return s;
  }

  static ManifoldSpec sphere(Index d, double radius = 1.0) {
    if (d < 1) fail(ErrorCode::InvalidSpec, "Sphere ambient dimension must be >= 1");
    if (!(radius > 0.0) || !std::isfinite(radius))
      fail(ErrorCode::InvalidSpec, "Sphere radius must be > 0");
    ManifoldSpec s(ManifoldKind::Sphere);
    s.rows_ = d;
    s.cols_ = 1;
    s.radius_ = radius;
    return s;
  }

  static ManifoldSpec stiefel(Index n, Index p) {
    if (p < 1 || n < p) fail(ErrorCode::InvalidSpec, "Stiefel requires n >= p >= 1");
    ManifoldSpec s(ManifoldKind::Stiefel);
    s.rows_ = n;
    s.cols_ = p;
    return s;
  }

  static ManifoldSpec spd(Index n) {
    if (n < 1) fail(ErrorCode::InvalidSpec, "SPD order must be >= 1");
    ManifoldSpec s(ManifoldKind::Spd);
    s.rows_ = n;
    s.cols_ = n;
    return s;
  }

  static ManifoldSpec product(std::vector<ManifoldSpec> factors) {
    if (factors.empty()) fail(ErrorCode::InvalidSpec, "Product must be non-empty");
    ManifoldSpec s(ManifoldKind::Product);
    s.factors_ = std::move(factors);
    return s;
  }

  ManifoldKind kind() const { return kind_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  double radius() const { return radius_; }
  const std::vector<ManifoldSpec>& factors() const { return factors_; }

  Index storage_size() const {
    if (kind_ != ManifoldKind::Product) return rows_ * cols_;
    Index total = 0;
    for (const auto& f : factors_) total += f.storage_size();
    return total;
  }

  bool has_exp() const {
    if (kind_ == ManifoldKind::Stiefel) return false;
    if (kind_ != ManifoldKind::Product) return true;
    for (const auto& f : factors_)
      if (!f.has_exp()) return false;
    return true;
  }

  std::string name() const {
    switch (kind_) {
      case ManifoldKind::Euclidean:
        return "Euclidean(" + std::to_string(rows_) + ")";
      case ManifoldKind::Sphere:
        return "Sphere(" + std::to_string(rows_) + ", r=" + std::to_string(radius_) + ")";
      case ManifoldKind::Stiefel:
        return "Stiefel(" + std::to_string(rows_) + "," + std::to_string(cols_) + ")";
      case ManifoldKind::Spd:
        return "SPD(" + std::to_string(rows_) + ")";
      case ManifoldKind::Product: {
        std::string out = "Product(";
        for (std::size_t i = 0; i < factors_.size(); ++i) {
          if (i) out += " x ";
          out += factors_[i].name();
        }
        return out + ")";
      }
    }
    return "?";
  }

  friend bool operator==(const ManifoldSpec&, const ManifoldSpec&) = default;

 private:
  explicit ManifoldSpec(ManifoldKind kind) : kind_(kind) {}

  ManifoldKind kind_;
  Index rows_ = 0;
  Index cols_ = 0;
  double radius_ = 1.0;
  std::vector<ManifoldSpec> factors_;
};

struct Point {
  Eigen::VectorXd data;
};

/// A tangent vector remembers the point it is attached to.
struct Tangent {
  Point base;
  Eigen::VectorXd data;
};

inline Tangent scaled(const Tangent& u, double s) { return {u.base, s * u.data}; }

inline Eigen::Map<const Eigen::MatrixXd> as_matrix(const ManifoldSpec& spec,
                                                   const Eigen::VectorXd& data) {
  return {data.data(), spec.rows(), spec.cols()};
}

inline Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

namespace detail {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CRef = Eigen::Ref<const Eigen::VectorXd>;

inline Mat mat(const ManifoldSpec& s, CRef v) {
  return Eigen::Map<const Mat>(v.data(), s.rows(), s.cols());
}

inline void require_size(const ManifoldSpec& s, CRef v, const char* what) {
  if (v.size() != s.storage_size())
    fail(ErrorCode::InvalidInput, std::string(what) + " has size " + std::to_string(v.size()) +
                                      ", expected " + std::to_string(s.storage_size()) +
                                      " for " + s.name());
}

/// Run `f(factor, offset, length)` for every factor of a product.
template <typename F>
void for_each_factor(const ManifoldSpec& s, F&& f) {
  Index offset = 0;
  for (const auto& factor : s.factors()) {
    const Index len = factor.storage_size();
    f(factor, offset, len);
    offset += len;
  }
}

inline double sym_scale(CRef v) { return std::max(1.0, v.cwiseAbs().maxCoeff()); }

inline bool is_symmetric(const ManifoldSpec& s, CRef v, double tol) {
  const Mat m = mat(s, v);
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * sym_scale(v);
}

inline bool is_point(const ManifoldSpec& s, CRef x, const ToleranceProfile& tol) {
  if (x.size() != s.storage_size() || !x.allFinite()) return false;
  switch (s.kind()) {
    case ManifoldKind::Euclidean:
      return true;
    case ManifoldKind::Sphere:
      return std::abs(x.norm() - s.radius()) <= tol.sphere_norm * s.radius();
    case ManifoldKind::Stiefel: {
      const Mat m = mat(s, x);
      const Mat gram = m.transpose() * m - Mat::Identity(s.cols(), s.cols());
      return gram.norm() <= tol.stiefel_orth;
    }
    case ManifoldKind::Spd: {
      if (!is_symmetric(s, x, tol.spd_symmetry)) return false;
      Eigen::SelfAdjointEigenSolver<Mat> es(spd::sym(mat(s, x)), Eigen::EigenvaluesOnly);
      return es.eigenvalues().minCoeff() > 0.0;
    }
    case ManifoldKind::Product: {
      bool ok = true;
      for_each_factor(s, [&](const ManifoldSpec& f, Index off, Index len) {
        ok = ok && detail::is_point(f, x.segment(off, len), tol);
      });
      return ok;
    }
  }
  return false;
}

inline bool is_tangent(const ManifoldSpec& s, CRef x, CRef u, const ToleranceProfile& tol) {
  if (u.size() != s.storage_size() || !u.allFinite()) return false;
  switch (s.kind()) {
    case ManifoldKind::Euclidean:
      return true;
    case ManifoldKind::Sphere:
      return std::abs(x.dot(u)) <= tol.sphere_tangent * s.radius() * u.norm();
    case ManifoldKind::Stiefel: {
      const Mat xm = mat(s, x);
      const Mat um = mat(s, u);
      const Mat skew = xm.transpose() * um + um.transpose() * xm;
      return skew.norm() <= tol.stiefel_tangent * std::max(1.0, um.norm());
    }
    case ManifoldKind::Spd:
      return is_symmetric(s, u, tol.spd_symmetry);
    case ManifoldKind::Product: {
      bool ok = true;
      for_each_factor(s, [&](const ManifoldSpec& f, Index off, Index len) {
        ok = ok && detail::is_tangent(f, x.segment(off, len), u.segment(off, len), tol);
      });
      return ok;
    }
  }
  return false;
}

inline double inner(const ManifoldSpec& s, CRef x, CRef u, CRef v, const GeometryContext& ctx) {
  switch (s.kind()) {
    case ManifoldKind::Euclidean:
    case ManifoldKind::Sphere:
    case ManifoldKind::Stiefel:
      return u.dot(v);
    case ManifoldKind::Spd: {
      const auto roots = spd::sqrt_pair(mat(s, x), ctx.tol.eig_floor, ctx.clamps);
      const Mat a = roots.inv_sqrt * mat(s, u) * roots.inv_sqrt;
      const Mat b = roots.inv_sqrt * mat(s, v) * roots.inv_sqrt;
      return (a.array() * b.array()).sum();
    }
    case ManifoldKind::Product: {
      double total = 0.0;
      for_each_factor(s, [&](const ManifoldSpec& f, Index off, Index len) {
        total += detail::inner(f, x.segment(off, len), u.segment(off, len), v.segment(off, len), ctx);
      });
      return total;
    }
  }
  return 0.0;
}

/// Thin Q of a (n x p) with R's diagonal forced positive.
inline Mat qr_positive(const Mat& a, double rank_tol) {
  Eigen::HouseholderQR<Mat> qr(a);
  const Index n = a.rows();
  const Index p = a.cols();
  Mat q = qr.householderQ() * Mat::Identity(n, p);
  const Mat& r = qr.matrixQR();
  const double scale = std::max(a.norm(), std::numeric_limits<double>::min());
  for (Index j = 0; j < p; ++j) {
    const double rjj = r(j, j);
    if (!(std::abs(rjj) > rank_tol * scale))
      fail(ErrorCode::DegenerateRetraction, "QR of X + U is rank-deficient");
    if (rjj < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

inline Vec spd_exp(const ManifoldSpec& s, CRef x, CRef u, const GeometryContext& ctx) {
  const auto roots = spd::sqrt_pair(mat(s, x), ctx.tol.eig_floor, ctx.clamps);
  const Mat inner_arg = roots.inv_sqrt * mat(s, u) * roots.inv_sqrt;
  const Mat out = spd::sym(roots.sqrt * spd::expm_sym(inner_arg) * roots.sqrt);
  return flatten(out);
}

inline Vec retract(const ManifoldSpec& s, CRef x, CRef u, const GeometryContext& ctx) {
  if (u.isZero(0.0)) return x;
  switch (s.kind()) {
    case ManifoldKind::Euclidean:
      return x + u;
    case ManifoldKind::Sphere: {
      const Vec sum = x + u;
      const double nrm = sum.norm();
      if (!(nrm >= ctx.tol.degenerate_norm))
        fail(ErrorCode::DegenerateRetraction, "x + u passes through the origin");
      return (s.radius() / nrm) * sum;
    }
    case ManifoldKind::Stiefel:
      return flatten(qr_positive(mat(s, x) + mat(s, u), ctx.tol.qr_rank));
    case ManifoldKind::Spd:
      return spd_exp(s, x, u, ctx);
    case ManifoldKind::Product: {
      Vec out(x.size());
      for_each_factor(s, [&](const ManifoldSpec& f, Index off, Index len) {
        out.segment(off, len) = detail::retract(f, x.segment(off, len), u.segment(off, len), ctx);
      });
      return out;
    }
  }
  return x;
}

inline Vec exp(const ManifoldSpec& s, CRef x, CRef u, const GeometryContext& ctx) {
  switch (s.kind()) {
    case ManifoldKind::Euclidean:
      return x + u;
    case ManifoldKind::Sphere: {
      const double nu = u.norm();
      if (nu == 0.0) return x;
      const double angle = nu / s.radius();
      Vec out = std::cos(angle) * x + (s.radius() * std::sin(angle) / nu) * u;
      // Re-normalise so round-off never accumulates off the sphere.
      return (s.radius() / out.norm()) * out;
    }
    case ManifoldKind::Stiefel:
      fail(ErrorCode::Unsupported, "Stiefel has no exponential map here; use retract");
    case ManifoldKind::Spd:
      if (u.isZero(0.0)) return x;
      return spd_exp(s, x, u, ctx);
    case ManifoldKind::Product: {
      Vec out(x.size());
      for_each_factor(s, [&](const ManifoldSpec& f, Index off, Index len) {
        out.segment(off, len) = detail::exp(f, x.segment(off, len), u.segment(off, len), ctx);
      });
      return out;
    }
  }
  return x;
}

/// Angle between two sphere points, accurate near 0 and pi.
inline double sphere_angle(const ManifoldSpec& s, CRef x, CRef y) {
  const double r2 = s.radius() * s.radius();
  const double c = x.dot(y) / r2;
  const double sn = (y - (x.dot(y) / r2) * x).norm() / s.radius();
  return std::atan2(sn, c);
}

inline void require_not_antipodal(const ManifoldSpec& s, CRef x, CRef y, const ToleranceProfile& tol) {
  const double c = x.dot(y) / (s.radius() * s.radius());
  if (c <= -1.0 + tol.antipodal)
    fail(ErrorCode::AntipodalPoints, "points are (numerically) antipodal on " + s.name());
}

inline Vec log(const ManifoldSpec& s, CRef x, CRef y, const GeometryContext& ctx) {
  switch (s.kind()) {
    case ManifoldKind::Euclidean:
      return y - x;
    case ManifoldKind::Sphere: {
      require_not_antipodal(s, x, y, ctx.tol);
      const double r2 = s.radius() * s.radius();
      const Vec p = y - (x.dot(y) / r2) * x;
      const double pn = p.norm();
      if (pn == 0.0) return Vec::Zero(x.size());
      const double theta = sphere_angle(s, x, y);
      return (theta * s.radius() / pn) * p;
    }
    case ManifoldKind::Stiefel:
      fail(ErrorCode::Unsupported, "Stiefel has no logarithm map here");
    case ManifoldKind::Spd: {
      const auto roots = spd::sqrt_pair(mat(s, x), ctx.tol.eig_floor, ctx.clamps);
      const Mat middle = roots.inv_sqrt * mat(s, y) * roots.inv_sqrt;
      const Mat l = spd::logm(middle, ctx.tol.eig_floor, ctx.clamps);
      return flatten(spd::sym(roots.sqrt * l * roots.sqrt));
    }
    case ManifoldKind::Product: {
      Vec out(x.size());
      for_each_factor(s, [&](const ManifoldSpec& f, Index off, Index len) {
        out.segment(off, len) = detail::log(f, x.segment(off, len), y.segment(off, len), ctx);
      });
      return out;
    }
  }
  return x;
}

inline Vec project(const ManifoldSpec& s, CRef x, CRef a) {
  switch (s.kind()) {
    case ManifoldKind::Euclidean:
      return a;
    case ManifoldKind::Sphere:
      return a - (x.dot(a) / (s.radius() * s.radius())) * x;
    case ManifoldKind::Stiefel: {
      const Mat xm = mat(s, x);
      const Mat am = mat(s, a);
      return flatten(am - xm * spd::sym(xm.transpose() * am));
    }
    case ManifoldKind::Spd: {
      const Mat xm = mat(s, x);
      return flatten(spd::sym(xm * spd::sym(mat(s, a)) * xm));
    }
    case ManifoldKind::Product: {
      Vec out(x.size());
      for_each_factor(s, [&](const ManifoldSpec& f, Index off, Index len) {
        out.segment(off, len) = detail::project(f, x.segment(off, len), a.segment(off, len));
      });
      return out;
    }
  }
  return a;
}

inline Vec transport(const ManifoldSpec& s, CRef from, CRef to, CRef u, const GeometryContext& ctx) {
  switch (s.kind()) {
    case ManifoldKind::Euclidean:
      return u;
    case ManifoldKind::Sphere: {
      if (from == to) return u;
      require_not_antipodal(s, from, to, ctx.tol);
      const double r2 = s.radius() * s.radius();
      const double coef = to.dot(u) / (r2 + from.dot(to));
      return u - coef * (from + to);
    }
    case ManifoldKind::Stiefel:
      return project(s, to, u);
    case ManifoldKind::Spd: {
      if (from == to) return u;
      const auto roots = spd::sqrt_pair(mat(s, from), ctx.tol.eig_floor, ctx.clamps);
      const Mat middle = roots.inv_sqrt * mat(s, to) * roots.inv_sqrt;
      const Mat e = roots.sqrt * spd::sqrtm(middle, ctx.tol.eig_floor, ctx.clamps) * roots.inv_sqrt;
      return flatten(spd::sym(e * mat(s, u) * e.transpose()));
    }
    case ManifoldKind::Product: {
      Vec out(u.size());
      for_each_factor(s, [&](const ManifoldSpec& f, Index off, Index len) {
        out.segment(off, len) =
            transport(f, from.segment(off, len), to.segment(off, len), u.segment(off, len), ctx);
      });
      return out;
    }
  }
  return u;
}

inline double dist2(const ManifoldSpec& s, CRef x, CRef y, const GeometryContext& ctx) {
  switch (s.kind()) {
    case ManifoldKind::Euclidean:
    case ManifoldKind::Stiefel:
      return (y - x).squaredNorm();
    case ManifoldKind::Sphere: {
      const double d = s.radius() * sphere_angle(s, x, y);
      return d * d;
    }
    case ManifoldKind::Spd: {
      if (x == y) return 0.0;
      const auto roots = spd::sqrt_pair(mat(s, x), ctx.tol.eig_floor, ctx.clamps);
      auto e = spd::eig(roots.inv_sqrt * mat(s, y) * roots.inv_sqrt);
      spd::clamp_floor(e, ctx.tol.eig_floor, ctx.clamps);
      return e.values.array().log().square().sum();
    }
    case ManifoldKind::Product: {
      double total = 0.0;
      for_each_factor(s, [&](const ManifoldSpec& f, Index off, Index len) {
        total += detail::dist2(f, x.segment(off, len), y.segment(off, len), ctx);
      });
      return total;
    }
  }
  return 0.0;
}

template <typename Rng>
Vec gaussian(Index n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

template <typename Rng>
Vec random_point(const ManifoldSpec& s, Rng& rng) {
  switch (s.kind()) {
    case ManifoldKind::Euclidean:
      return gaussian(s.rows(), rng);
    case ManifoldKind::Sphere: {
      Vec g = gaussian(s.rows(), rng);
      while (g.norm() == 0.0) g = gaussian(s.rows(), rng);
      return (s.radius() / g.norm()) * g;
    }
    case ManifoldKind::Stiefel: {
      const Vec g = gaussian(s.rows() * s.cols(), rng);
      return flatten(qr_positive(mat(s, g), 0.0));
    }
    case ManifoldKind::Spd: {
      // expm of a symmetric Gaussian: eigenvalues e^{lambda} stay well
      // inside the cone.
      const Vec g = gaussian(s.rows() * s.cols(), rng);
      return flatten(spd::expm_sym(0.5 * spd::sym(mat(s, g))));
    }
    case ManifoldKind::Product: {
      Vec out(s.storage_size());
      for_each_factor(s, [&](const ManifoldSpec& f, Index off, Index len) {
        out.segment(off, len) = detail::random_point(f, rng);
      });
      return out;
    }
  }
  return {};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public API on Point / Tangent.

inline bool is_point(const ManifoldSpec& spec, const Point& x, const ToleranceProfile& tol = {}) {
  return detail::is_point(spec, x.data, tol);
}

inline bool is_tangent(const ManifoldSpec& spec, const Tangent& u, const ToleranceProfile& tol = {}) {
  return detail::is_point(spec, u.base.data, tol) && detail::is_tangent(spec, u.base.data, u.data, tol);
}

inline bool same_base(const Point& a, const Point& b, double tol) {
  if (a.data.size() != b.data.size()) return false;
  for (Index i = 0; i < a.data.size(); ++i)
    if (!(std::abs(a.data[i] - b.data[i]) <= tol * (1.0 + std::abs(a.data[i])))) return false;
  return true;
}

inline void require_base(const Point& a, const Point& b, const ToleranceProfile& tol) {
  if (!same_base(a, b, tol.base_match))
    fail(ErrorCode::BaseMismatch, "tangent vectors are attached to different points");
}

inline Tangent zero_tangent(const ManifoldSpec& spec, const Point& x) {
  return {x, Eigen::VectorXd::Zero(spec.storage_size())};
}

inline double inner(const ManifoldSpec& spec, const Tangent& u, const Tangent& v,
                    const GeometryContext& ctx = {}) {
  require_base(u.base, v.base, ctx.tol);
  detail::require_size(spec, u.data, "tangent");
  detail::require_size(spec, v.data, "tangent");
  return detail::inner(spec, u.base.data, u.data, v.data, ctx);
}

inline double norm(const ManifoldSpec& spec, const Tangent& u, const GeometryContext& ctx = {}) {
  detail::require_size(spec, u.data, "tangent");
  return std::sqrt(std::max(0.0, detail::inner(spec, u.base.data, u.data, u.data, ctx)));
}

inline Point retract(const ManifoldSpec& spec, const Point& x, const Tangent& u,
                     const GeometryContext& ctx = {}) {
  require_base(x, u.base, ctx.tol);
  detail::require_size(spec, u.data, "tangent");
  return {detail::retract(spec, x.data, u.data, ctx)};
}

inline Point exp(const ManifoldSpec& spec, const Point& x, const Tangent& u,
                 const GeometryContext& ctx = {}) {
  require_base(x, u.base, ctx.tol);
  detail::require_size(spec, u.data, "tangent");
  return {detail::exp(spec, x.data, u.data, ctx)};
}

inline Tangent log(const ManifoldSpec& spec, const Point& x, const Point& y,
                   const GeometryContext& ctx = {}) {
  detail::require_size(spec, x.data, "point");
  detail::require_size(spec, y.data, "point");
  return {x, detail::log(spec, x.data, y.data, ctx)};
}

inline Tangent transport(const ManifoldSpec& spec, const Point& from, const Point& to,
                         const Tangent& u, const GeometryContext& ctx = {}) {
  require_base(from, u.base, ctx.tol);
  detail::require_size(spec, to.data, "point");
  return {to, detail::transport(spec, from.data, to.data, u.data, ctx)};
}

inline double dist(const ManifoldSpec& spec, const Point& x, const Point& y,
                   const GeometryContext& ctx = {}) {
  detail::require_size(spec, x.data, "point");
  detail::require_size(spec, y.data, "point");
  return std::sqrt(std::max(0.0, detail::dist2(spec, x.data, y.data, ctx)));
}

/// Ambient (Euclidean) vector -> tangent vector at x. For the SPD factor
/// this is the affine-invariant Riesz map X sym(A) X, so a Euclidean
/// gradient goes straight to the Riemannian gradient.
inline Tangent project_tangent(const ManifoldSpec& spec, const Point& x,
                               const Eigen::VectorXd& ambient) {
  detail::require_size(spec, x.data, "point");
  detail::require_size(spec, ambient, "ambient vector");
  return {x, detail::project(spec, x.data, ambient)};
}

template <typename Rng>
Point random_point(const ManifoldSpec& spec, Rng& rng) {
  return {detail::random_point(spec, rng)};
}

/// Uniformly oriented tangent at x with metric norm `length`.
template <typename Rng>
Tangent random_tangent(const ManifoldSpec& spec, const Point& x, Rng& rng, double length,
                       const GeometryContext& ctx = {}) {
  if (!(length >= 0.0)) fail(ErrorCode::InvalidInput, "tangent norm must be >= 0");
  if (length == 0.0) return zero_tangent(spec, x);
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::VectorXd dir = detail::project(spec, x.data, detail::gaussian(spec.storage_size(), rng));
    const double n = std::sqrt(std::max(0.0, detail::inner(spec, x.data, dir, dir, ctx)));
    // Sphere(1) and Stiefel(1,1) have a zero-dimensional tangent space.
    if (n > 1e-12 * std::max(1.0, dir.norm())) return {x, (length / n) * dir};
  }
  fail(ErrorCode::InvalidInput, "tangent space of " + spec.name() + " is trivial");
}

}  // namespace ragda
