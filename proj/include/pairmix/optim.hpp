#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace pairmix {

// Objective callback: returns f(x) and, when grad is non-null, fills the
// gradient.  Must be deterministic for reproducible fits.
using Objective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

enum class SolverKind { kBfgs, kConjugateGradient };

struct MinimizeOptions {
  SolverKind solver = SolverKind::kBfgs;
  int max_iterations = 500;
  // Converged when ||grad||_inf <= tolerance * max(1, |f|).
  double gradient_tolerance = 1e-5;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  int n_evaluations = 0;
  bool converged = false;
  std::string message;
};

// Dense quasi-Newton minimizer: BFGS on the inverse Hessian, or
// Polak-Ribiere+ nonlinear conjugate gradients, both under a strong-Wolfe
// line search (c1 = 1e-4; c2 = 0.9 for BFGS, 0.45 for CG).
MinimizeResult minimize(const Objective& fn, const Eigen::VectorXd& x0,
                        const MinimizeOptions& options);

}  // namespace pairmix
