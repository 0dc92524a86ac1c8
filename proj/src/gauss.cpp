#include "pairmix/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pairmix {

namespace {

constexpr double kInvSqrtTwoPi = 0.39894228040143267794;
constexpr double kSqrtHalf = 0.70710678118654752440;
constexpr double kSqrtTwoPi = 2.50662827463100050242;

double clamp_rho(double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) {
    throw std::invalid_argument("bivariate kernel: correlation must lie in [-1, 1]");
  }
  return std::clamp(rho, -(1.0 - kRhoEps), 1.0 - kRhoEps);
}

// Gauss-Legendre abscissae (negative half) and weights for 6-, 12- and
// 20-point rules, as tabulated by Genz for the Drezner/Wesolowsky integral.
constexpr double kX6[3] = {-0.9324695142031521, -0.6612093864662645,
                           -0.2386191860831969};
constexpr double kW6[3] = {0.1713244923791704, 0.3607615730481386,
                           0.4679139345726910};

constexpr double kX12[6] = {-0.9815606342467192, -0.9041172563704749,
                            -0.7699026741943047, -0.5873179542866175,
                            -0.3678314989981802, -0.1252334085114689};
constexpr double kW12[6] = {0.04717533638651183, 0.1069393259953184,
                            0.1600783285433462,  0.2031674267230659,
                            0.2334925365383548,  0.2491470458134028};

constexpr double kX20[10] = {-0.9931285991850949,  -0.9639719272779138,
                             -0.9122344282513259,  -0.8391169718222188,
                             -0.7463319064601508,  -0.6360536807265150,
                             -0.5108670019508271,  -0.3737060887154195,
                             -0.2277858511416451,  -0.07652652113349734};
constexpr double kW20[10] = {0.01761400713915212, 0.04060142980038694,
                             0.06267204833410907, 0.08327674157670475,
                             0.1019301198172404,  0.1181945319615184,
                             0.1316886384491766,  0.1420961093183820,
                             0.1491729864726037,  0.1527533871307258};

// Upper-orthant probability P(X > h, Y > k) for standard bivariate normal
// variables with correlation r, after Drezner & Wesolowsky and Genz.  The
// quadrature rule grows with |r|; |r| > 0.925 switches to the complementary
// expansion in sqrt(1 - r^2).
double bvn_upper(double h, double k, double r) {
  if (h == kInf || k == kInf) return 0.0;
  if (h == -kInf) return (k == -kInf) ? 1.0 : std_normal_cdf(-k);
  if (k == -kInf) return std_normal_cdf(-h);

  r = clamp_rho(r);
  if (r == 0.0) return std_normal_cdf(-h) * std_normal_cdf(-k);

  const double* x;
  const double* w;
  int ng;
  const double ar = std::fabs(r);
  if (ar < 0.3) {
    x = kX6;
    w = kW6;
    ng = 3;
  } else if (ar < 0.75) {
    x = kX12;
    w = kW12;
    ng = 6;
  } else {
    x = kX20;
    w = kW20;
    ng = 10;
  }

  double hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    // P = Phi(-h)Phi(-k) + (1/2pi) int_0^{asin r} exp(-(h^2+k^2-2hk sin t)
    //                                                / (2 cos^2 t)) dt
    const double hs = 0.5 * (h * h + k * k);
    const double asr = 0.5 * std::asin(r);
    for (int i = 0; i < ng; ++i) {
      for (int is = -1; is <= 1; is += 2) {
        const double sn = std::sin(asr * (is * x[i] + 1.0));
        bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    bvn = bvn * asr / kTwoPi + std_normal_cdf(-h) * std_normal_cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -0.5 * (bs / as + hk);
    if (asr > -100.0) {
      bvn = a * std::exp(asr) *
            (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 +
             c * d * as * as / 5.0);
    }
    if (-hk < 100.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-0.5 * hk) * kSqrtTwoPi * std_normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a *= 0.5;
    for (int i = 0; i < ng; ++i) {
      for (int is = -1; is <= 1; is += 2) {
        const double xs = std::pow(a * (is * x[i] + 1.0), 2);
        const double rs = std::sqrt(1.0 - xs);
        asr = -0.5 * (bs / xs + hk);
        if (asr > -100.0) {
          const double sp = 1.0 + c * xs * (1.0 + d * xs);
          const double ep =
              std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs;
          bvn += a * w[i] * std::exp(asr) * (ep - sp);
        }
      }
    }
    bvn = -bvn / kTwoPi;
    if (r > 0.0) {
      bvn += std_normal_cdf(-std::max(h, k));
    } else {
      bvn = -bvn + std::max(0.0, std_normal_cdf(-h) - std_normal_cdf(-k));
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

}  // namespace

double std_normal_pdf(double x) {
  return kInvSqrtTwoPi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * kSqrtHalf); }

double std_normal_quantile(double p) {
  // Wichura's algorithm AS 241, PPND16: minimax rational approximations on
  // three regions of q = p - 1/2 resp. r = sqrt(-log(min(p, 1-p))).
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("std_normal_quantile: p must lie in (0, 1)");
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return (q < 0.0) ? -val : val;
}

double bvn_pdf(const BivariateArgs& a) {
  if (std::isinf(a.x) || std::isinf(a.y)) return 0.0;
  const double rho = clamp_rho(a.rho);
  const double omr2 = (1.0 - rho) * (1.0 + rho);
  const double quad = a.x * a.x - 2.0 * rho * a.x * a.y + a.y * a.y;
  return std::exp(-0.5 * quad / omr2) / (kTwoPi * std::sqrt(omr2));
}

double bvn_cdf(const BivariateArgs& a) { return bvn_upper(-a.x, -a.y, a.rho); }

double bvn_cdf_dx(const BivariateArgs& a) {
  if (std::isinf(a.x)) return 0.0;
  if (std::isinf(a.y)) return a.y > 0.0 ? std_normal_pdf(a.x) : 0.0;
  const double rho = clamp_rho(a.rho);
  const double s = std::sqrt((1.0 - rho) * (1.0 + rho));
  return std_normal_pdf(a.x) * std_normal_cdf((a.y - rho * a.x) / s);
}

double bvn_cdf_drho(const BivariateArgs& a) {
  if (std::isinf(a.x) || std::isinf(a.y)) return 0.0;
  return bvn_pdf(a);
}

}  // namespace pairmix
