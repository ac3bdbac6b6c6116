#pragma once

// Symmetric matrix functions through a single eigendecomposition.
//
// Every function that needs log/inverse/sqrt of an SPD matrix clamps the
// eigenvalues from below at `rel_floor * max_eigenvalue` first. A clamp is
// not an error; it bumps the caller-owned counter (if any) so that drift
// toward the boundary of the cone is observable.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace ragda {

/// Caller-owned tally of eigenvalue clamp events. Never global: each call
/// site that cares passes its own instance down.
struct ClampCounter {
  std::size_t events = 0;
};

namespace spd {

inline Eigen::MatrixXd sym(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

struct SymEig {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

inline SymEig eig(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym(s));
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Raise eigenvalues below `rel_floor * max(lambda)` to that floor.
inline void clamp_floor(SymEig& e, double rel_floor, ClampCounter* counter) {
  if (e.values.size() == 0) return;
  const double top = e.values.maxCoeff();
  const double floor = rel_floor * std::max(top, 0.0);
  bool clamped = false;
  for (Eigen::Index i = 0; i < e.values.size(); ++i) {
    if (!(e.values[i] > floor)) {
      // A non-positive top eigenvalue has no meaningful floor; leave the
      // value so the caller sees a non-finite result downstream.
      if (floor > 0.0) {
        e.values[i] = floor;
        clamped = true;
      }
    }
  }
  if (clamped && counter != nullptr) ++counter->events;
}

/// Q f(Lambda) Q^T, symmetric by construction.
template <typename F>
Eigen::MatrixXd apply(const SymEig& e, F&& f) {
  Eigen::VectorXd mapped(e.values.size());
  for (Eigen::Index i = 0; i < e.values.size(); ++i) mapped[i] = f(e.values[i]);
  Eigen::MatrixXd out = e.vectors * mapped.asDiagonal() * e.vectors.transpose();
  return sym(out);
}

inline Eigen::MatrixXd expm_sym(const Eigen::MatrixXd& s) {
  return apply(eig(s), [](double v) { return std::exp(v); });
}

inline Eigen::MatrixXd logm(const Eigen::MatrixXd& x, double rel_floor,
                            ClampCounter* counter) {
  auto e = eig(x);
  clamp_floor(e, rel_floor, counter);
  return apply(e, [](double v) { return std::log(v); });
}

inline Eigen::MatrixXd sqrtm(const Eigen::MatrixXd& x, double rel_floor,
                             ClampCounter* counter) {
  auto e = eig(x);
  clamp_floor(e, rel_floor, counter);
  return apply(e, [](double v) { return std::sqrt(v); });
}

/// X^{1/2} and X^{-1/2} from one decomposition.
struct SqrtPair {
  Eigen::MatrixXd sqrt;
  Eigen::MatrixXd inv_sqrt;
};

inline SqrtPair sqrt_pair(const Eigen::MatrixXd& x, double rel_floor,
                          ClampCounter* counter) {
  auto e = eig(x);
  clamp_floor(e, rel_floor, counter);
  return {apply(e, [](double v) { return std::sqrt(v); }),
          apply(e, [](double v) { return 1.0 / std::sqrt(v); })};
}

/// Sum of log-eigenvalues (log det) after clamping.
inline double logdet(const Eigen::MatrixXd& x, double rel_floor,
                     ClampCounter* counter) {
  auto e = eig(x);
  clamp_floor(e, rel_floor, counter);
  return e.values.array().log().sum();
}

/// X log(X), the affine-invariant Riemannian gradient of d^2(X, I) / 2.
inline Eigen::MatrixXd x_logm(const Eigen::MatrixXd& x, double rel_floor,
                              ClampCounter* counter) {
  auto e = eig(x);
  clamp_floor(e, rel_floor, counter);
  return apply(e, [](double v) { return v * std::log(v); });
}

}  // namespace spd
}  // namespace ragda
