// Self-contained reference implementations used only by the tests: slow but
// independent of everything under src/.  All normal-theory quantities here
// are built from std::exp / std::erfc plus adaptive Simpson quadrature.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

namespace oracle {

inline constexpr double kSqrtTwoPi = 2.50662827463100050242;
inline constexpr double kTwoPi = 6.28318530717958647692;
// Integration window: the standard normal carries ~1e-17 mass beyond |8.5|.
inline constexpr double kTail = 8.5;

inline double phi(double x) { return std::exp(-0.5 * x * x) / kSqrtTwoPi; }

inline double Phi(double x) {
  return 0.5 * std::erfc(-x / 1.41421356237309504880);
}

inline double phi2(double x, double y, double rho) {
  const double omr2 = (1.0 - rho) * (1.0 + rho);
  const double q = (x * x - 2.0 * rho * x * y + y * y) / omr2;
  return std::exp(-0.5 * q) / (kTwoPi * std::sqrt(omr2));
}

namespace detail {

inline double adapt(const std::function<double(double)>& f, double a, double b,
                    double fa, double fm, double fb, double whole, double eps,
                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) {
    return left + right + delta / 15.0;
  }
  return adapt(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

}  // namespace detail

// Adaptive Simpson on [a, b]; infinite endpoints are truncated at +-kTail.
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double eps = 1e-13) {
  a = std::max(a, -kTail);
  b = std::min(b, kTail);
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adapt(f, a, b, fa, fm, fb, whole, eps, 44);
}

// P(X <= x, Y <= y) by honest nested 2D quadrature of the joint density.
inline double bvn_cdf_quad2d(double x, double y, double rho,
                             double eps_outer = 1e-10,
                             double eps_inner = 1e-12) {
  return integrate(
      [&](double u) {
        return integrate([&](double v) { return phi2(u, v, rho); }, -kTail, y,
                         eps_inner);
      },
      -kTail, x, eps_outer);
}

// Same probability via the conditional reduction: integrates the marginal
// density times the conditional normal distribution function (erfc-based).
// Much faster and tighter than the nested form; used where many evaluations
// are needed.
inline double bvn_cdf_cond(double x, double y, double rho, double eps = 1e-13) {
  if (rho == 0.0) return Phi(x) * Phi(y);
  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  return integrate([&](double u) { return phi(u) * Phi((y - rho * u) / s); },
                   -kTail, x, eps);
}

// P(a < U <= b and V in dv at v) / dv for standard bivariate normals: the
// ordinal-Gaussian mixed term, as a single quadrature over the latent U.
inline double interval_times_density(double a, double b, double v, double rho,
                                     double eps = 1e-13) {
  return integrate([&](double u) { return phi2(u, v, rho); }, a, b, eps);
}

// Central finite-difference gradient of a scalar function of a flat vector.
template <typename F>
Eigen::VectorXd fd_gradient(const F& f, const Eigen::VectorXd& x,
                            double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// |a - b| scaled the way the gradient checks expect: absolute when both are
// small, relative otherwise.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace oracle
