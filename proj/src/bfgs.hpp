#pragma once

#include <functional>

#include "numerics.hpp"

namespace jams {

using GradField = std::function<Vector(const Vector&)>;

struct BfgsConfig {
  int max_iters = 200;
  double c1 = 1e-4;          // Armijo (sufficient decrease)
  double c2 = 0.9;           // curvature
  double grad_tol_rel = 1e-5;  // converged when ||g|| < grad_tol_rel * max(1, |f|)
  double hess_pd_rel = 1e-8;   // PD filter: min eig > hess_pd_rel * max eig
};

struct OptimizerResult {
  Vector x_star;
  double f_star = 0.0;
  Matrix hessian;  // finite-difference Hessian at x_star; empty unless gradient converged
  bool converged = false;
  long long n_evals = 0;  // joint (f, gradient) point evaluations
};

// Minimise f by BFGS with a strong-Wolfe line search.  `grad` may be empty, in
// which case central differences are used.  On gradient convergence the true
// Hessian is estimated by fd_hessian and the first/second-order KKT filter is
// applied: converged stays true only if the gradient norm passes grad_tol_rel
// and the Hessian is positive definite.  Hitting max_iters leaves
// converged=false with the best point retained for diagnostics.
OptimizerResult bfgs_minimize(const ScalarField& f, const GradField& grad, const Vector& x0,
                              const BfgsConfig& cfg = {});

}  // namespace jams
