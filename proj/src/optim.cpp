#include "pairmix/optim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pairmix {

namespace {

constexpr double kC1 = 1e-4;          // sufficient decrease
constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct LinePoint {
  double a = 0.0;  // step length
  double f = 0.0;  // objective value
  double d = 0.0;  // directional derivative
};

// phi(a) = f(x0 + a dir); non-finite values are treated as +inf so the
// search backs off automatically.
class LineEval {
 public:
  LineEval(const Objective& fn, const Eigen::VectorXd& x0,
           const Eigen::VectorXd& dir)
      : fn_(fn), x0_(x0), dir_(dir), x_(x0.size()), g_(x0.size()) {}

  LinePoint at(double a) {
    x_ = x0_ + a * dir_;
    double f = fn_(x_, &g_);
    ++evals_;
    double d = g_.dot(dir_);
    if (!std::isfinite(f)) {
      f = kInfinity;
      d = 0.0;
    }
    return {a, f, d};
  }

  // State of the most recent evaluation.
  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& g() const { return g_; }
  int evals() const { return evals_; }

 private:
  const Objective& fn_;
  const Eigen::VectorXd& x0_;
  const Eigen::VectorXd& dir_;
  Eigen::VectorXd x_, g_;
  int evals_ = 0;
};

struct SearchResult {
  bool ok = false;
  LinePoint point;
  Eigen::VectorXd x;
  Eigen::VectorXd g;
  int evals = 0;
};

// Cubic minimizer of the interpolant through (a0, f0, d0) and (a1, f1, d1),
// safeguarded to the interior of the interval.
double interpolate(const LinePoint& lo, const LinePoint& hi) {
  const double width = hi.a - lo.a;
  double a = lo.a + 0.5 * width;  // bisection fallback
  if (std::isfinite(lo.f) && std::isfinite(hi.f)) {
    const double d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (lo.a - hi.a);
    const double disc = d1 * d1 - lo.d * hi.d;
    if (disc >= 0.0) {
      const double d2 = std::copysign(std::sqrt(disc), width);
      const double cand = hi.a - (hi.a - lo.a) * (hi.d + d2 - d1) /
                                     (hi.d - lo.d + 2.0 * d2);
      const double margin = 0.1 * std::fabs(width);
      const double lo_a = std::min(lo.a, hi.a) + margin;
      const double hi_a = std::max(lo.a, hi.a) - margin;
      if (std::isfinite(cand) && cand >= lo_a && cand <= hi_a) a = cand;
    }
  }
  return a;
}

// Strong-Wolfe line search (bracket + zoom).  On bracket failure the best
// point satisfying sufficient decrease is still accepted; quasi-Newton
// updates guard on the curvature product separately.
SearchResult line_search(const Objective& fn, const Eigen::VectorXd& x0,
                         double f0, const Eigen::VectorXd& g0,
                         const Eigen::VectorXd& dir, double c2,
                         double a_init) {
  SearchResult out;
  const double d0 = g0.dot(dir);
  if (!(d0 < 0.0)) return out;
  LineEval eval(fn, x0, dir);

  bool have_fallback = false;
  LinePoint fallback;
  Eigen::VectorXd fallback_x, fallback_g;
  auto note = [&](const LinePoint& pt) {
    if (pt.f <= f0 + kC1 * pt.a * d0 && (!have_fallback || pt.f < fallback.f)) {
      have_fallback = true;
      fallback = pt;
      fallback_x = eval.x();
      fallback_g = eval.g();
    }
  };
  auto accept = [&](const LinePoint& pt) {
    out.ok = true;
    out.point = pt;
    out.x = eval.x();
    out.g = eval.g();
    out.evals = eval.evals();
    return out;
  };
  auto accept_fallback = [&]() {
    if (have_fallback) {
      out.ok = true;
      out.point = fallback;
      out.x = std::move(fallback_x);
      out.g = std::move(fallback_g);
    }
    out.evals = eval.evals();
    return out;
  };

  auto zoom = [&](LinePoint lo, LinePoint hi, Eigen::VectorXd lo_x,
                  Eigen::VectorXd lo_g) {
    for (int iter = 0; iter < 30; ++iter) {
      if (std::fabs(hi.a - lo.a) <
          1e-12 * std::max(1.0, std::fabs(lo.a))) {
        break;
      }
      const LinePoint cur = eval.at(interpolate(lo, hi));
      note(cur);
      if (cur.f > f0 + kC1 * cur.a * d0 || cur.f >= lo.f) {
        hi = cur;
      } else {
        if (std::fabs(cur.d) <= -c2 * d0) return accept(cur);
        if (cur.d * (hi.a - lo.a) >= 0.0) hi = lo;
        lo = cur;
        lo_x = eval.x();
        lo_g = eval.g();
      }
    }
    // Interval collapsed: take the best sufficient-decrease point seen.
    return accept_fallback();
  };

  LinePoint prev{0.0, f0, d0};
  double a = a_init;
  Eigen::VectorXd prev_x = x0, prev_g = g0;
  for (int iter = 0; iter < 20; ++iter) {
    const LinePoint cur = eval.at(a);
    note(cur);
    if (cur.f > f0 + kC1 * cur.a * d0 || (iter > 0 && cur.f >= prev.f)) {
      return zoom(prev, cur, std::move(prev_x), std::move(prev_g));
    }
    if (std::fabs(cur.d) <= -c2 * d0) return accept(cur);
    if (cur.d >= 0.0) {
      Eigen::VectorXd cur_x = eval.x(), cur_g = eval.g();
      return zoom(cur, prev, std::move(cur_x), std::move(cur_g));
    }
    prev = cur;
    prev_x = eval.x();
    prev_g = eval.g();
    a *= 2.0;
  }
  return accept_fallback();
}

bool converged(const Eigen::VectorXd& g, double f, double tol) {
  return g.lpNorm<Eigen::Infinity>() <= tol * std::max(1.0, std::fabs(f));
}

MinimizeResult run_bfgs(const Objective& fn, const Eigen::VectorXd& x0,
                        const MinimizeOptions& options) {
  const Eigen::Index d = x0.size();
  MinimizeResult res;
  res.x = x0;
  res.grad.resize(d);
  res.f = fn(res.x, &res.grad);
  res.n_evaluations = 1;
  if (!std::isfinite(res.f)) {
    throw std::runtime_error("minimize: objective is not finite at the start");
  }
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(d, d);
  bool scaled = false;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (converged(res.grad, res.f, options.gradient_tolerance)) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      return res;
    }
    Eigen::VectorXd dir = -(H * res.grad);
    if (dir.dot(res.grad) >= 0.0) {
      H.setIdentity();
      scaled = false;
      dir = -res.grad;
    }
    const auto ls = line_search(fn, res.x, res.f, res.grad, dir, 0.9, 1.0);
    res.n_evaluations += ls.evals;
    if (!ls.ok) {
      res.iterations = iter;
      res.message = "line search failed";
      return res;
    }
    const Eigen::VectorXd s = ls.x - res.x;
    const Eigen::VectorXd y = ls.g - res.grad;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      if (!scaled) {
        // First well-conditioned step: scale the inverse Hessian seed.
        H *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      const double yHy = y.dot(Hy);
      H.noalias() -= rho * (Hy * s.transpose() + s * Hy.transpose());
      H.noalias() += (rho * rho * yHy + rho) * (s * s.transpose());
    }
    res.x = ls.x;
    res.f = ls.point.f;
    res.grad = ls.g;
    res.iterations = iter + 1;
  }
  res.converged = converged(res.grad, res.f, options.gradient_tolerance);
  res.message = res.converged ? "gradient tolerance reached"
                              : "iteration limit reached";
  return res;
}

MinimizeResult run_cg(const Objective& fn, const Eigen::VectorXd& x0,
                      const MinimizeOptions& options) {
  MinimizeResult res;
  res.x = x0;
  res.grad.resize(x0.size());
  res.f = fn(res.x, &res.grad);
  res.n_evaluations = 1;
  if (!std::isfinite(res.f)) {
    throw std::runtime_error("minimize: objective is not finite at the start");
  }
  Eigen::VectorXd dir = -res.grad;
  double prev_d = res.grad.dot(dir);
  double prev_a = 0.0;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (converged(res.grad, res.f, options.gradient_tolerance)) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      return res;
    }
    double d0 = res.grad.dot(dir);
    if (d0 >= 0.0) {
      dir = -res.grad;
      d0 = res.grad.dot(dir);
    }
    // Warm-started initial step (previous a * ratio of slopes), else 1.
    double a_init = 1.0;
    if (prev_a > 0.0 && d0 < 0.0) {
      a_init = std::min(1.0, prev_a * prev_d / d0);
      if (!(a_init > 0.0) || !std::isfinite(a_init)) a_init = 1.0;
    }
    const auto ls = line_search(fn, res.x, res.f, res.grad, dir, 0.45, a_init);
    res.n_evaluations += ls.evals;
    if (!ls.ok) {
      res.iterations = iter;
      res.message = "line search failed";
      return res;
    }
    // Polak-Ribiere+ with automatic restart.
    const Eigen::VectorXd& g_new = ls.g;
    const double beta = std::max(
        0.0, g_new.dot(g_new - res.grad) / res.grad.squaredNorm());
    prev_a = ls.point.a;
    prev_d = d0;
    dir = -g_new + beta * dir;
    res.x = ls.x;
    res.f = ls.point.f;
    res.grad = g_new;
    res.iterations = iter + 1;
  }
  res.converged = converged(res.grad, res.f, options.gradient_tolerance);
  res.message = res.converged ? "gradient tolerance reached"
                              : "iteration limit reached";
  return res;
}

}  // namespace

MinimizeResult minimize(const Objective& fn, const Eigen::VectorXd& x0,
                        const MinimizeOptions& options) {
  if (x0.size() == 0) {
    throw std::invalid_argument("minimize: empty starting point");
  }
  return options.solver == SolverKind::kBfgs ? run_bfgs(fn, x0, options)
                                             : run_cg(fn, x0, options);
}

}  // namespace pairmix
