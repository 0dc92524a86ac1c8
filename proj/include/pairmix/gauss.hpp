#pragma once

#include <limits>

namespace pairmix {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kTwoPi = 6.28318530717958647692;
inline constexpr double kLogTwoPi = 1.83787706640934548356;

// Correlations are kept strictly inside (-1, 1); every kernel clamps its
// correlation argument to |rho| <= 1 - kRhoEps before use so that callers may
// pass values produced by tanh() without worrying about saturation to +-1.
inline constexpr double kRhoEps = 1e-10;

// Argument triple for the bivariate kernels.  x and y may be +-infinity
// (resolved to exact limiting values); rho must be finite.
struct BivariateArgs {
  double x = 0.0;
  double y = 0.0;
  double rho = 0.0;
};

// Standard normal density; returns 0 at +-infinity.
double std_normal_pdf(double x);

// Standard normal distribution function via erfc; absolute error below
// 1e-15 over the real line, exact 0/1 at -+infinity.
double std_normal_cdf(double x);

// Inverse of std_normal_cdf (Wichura's PPND16 rational approximation,
// relative error ~1e-16).  p must lie in (0, 1).
double std_normal_quantile(double p);

// Bivariate standard normal density with correlation rho.
double bvn_pdf(const BivariateArgs& a);

// P(X <= x, Y <= y) for standard bivariate normal with correlation rho,
// Gauss-Legendre rules after Drezner/Wesolowsky and Genz; absolute error
// below ~5e-14.  Infinite arguments reduce to the exact marginal limits.
double bvn_cdf(const BivariateArgs& a);

// d bvn_cdf / d x = phi(x) * Phi((y - rho*x) / sqrt(1 - rho^2)).
// Returns 0 when x is infinite; when y is infinite the conditional factor
// becomes exactly 1 or 0.
double bvn_cdf_dx(const BivariateArgs& a);

// d bvn_cdf / d rho = bvn_pdf(x, y, rho); 0 when either argument is infinite.
double bvn_cdf_drho(const BivariateArgs& a);

// Plain-argument conveniences for the bivariate kernels.
inline double bvn_pdf(double x, double y, double rho) {
  return bvn_pdf(BivariateArgs{x, y, rho});
}
inline double bvn_cdf(double x, double y, double rho) {
  return bvn_cdf(BivariateArgs{x, y, rho});
}
inline double bvn_cdf_dx(double x, double y, double rho) {
  return bvn_cdf_dx(BivariateArgs{x, y, rho});
}
inline double bvn_cdf_drho(double x, double y, double rho) {
  return bvn_cdf_drho(BivariateArgs{x, y, rho});
}

}  // namespace pairmix
