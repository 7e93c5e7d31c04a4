#include "bfgs.hpp"

#include <cmath>
#include <limits>

namespace jams {

namespace {

struct PointEval {
  double f = std::numeric_limits<double>::infinity();
  Vector g;
  bool has_g = false;
};

class Objective {
 public:
  Objective(const ScalarField& f, const GradField& grad) : f_(f), grad_(grad) {}

  // One joint (f, gradient) evaluation; the gradient is skipped for
  // non-finite f (such points are only ever rejected by the line search).
  PointEval eval(const Vector& x) {
    ++n_evals_;
    PointEval e;
    e.f = f_(x);
    if (std::isfinite(e.f)) {
      e.g = grad_ ? grad_(x) : fd_gradient(f_, x);
      e.has_g = true;
    }
    return e;
  }

  long long n_evals() const { return n_evals_; }

 private:
  const ScalarField& f_;
  const GradField& grad_;
  long long n_evals_ = 0;
};

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  Vector x;
  PointEval e;
};

// Strong-Wolfe line search (bracket then bisection zoom).
LineSearchResult line_search(Objective& obj, const Vector& x, const Vector& p, double phi0,
                             double dphi0, double c1, double c2) {
  LineSearchResult out;
  const double alpha_max = 1e3;

  auto armijo_fails = [&](double a, double f) {
    return !std::isfinite(f) || f > phi0 + c1 * a * dphi0;
  };

  double a_lo = 0.0, a_hi = 0.0;
  double phi_lo = phi0;
  Vector x_lo;
  PointEval e_lo;
  bool lo_has_eval = false;
  bool bracketed = false;

  double a_prev = 0.0, phi_prev = phi0;
  Vector x_prev;
  PointEval e_prev;
  bool prev_has_eval = false;

  double a = 1.0;
  for (int i = 0; i < 20 && !bracketed; ++i) {
    Vector xt = x + a * p;
    PointEval et = obj.eval(xt);
    if (armijo_fails(a, et.f) || (i > 0 && et.f >= phi_prev)) {
      a_lo = a_prev;
      phi_lo = phi_prev;
      x_lo = x_prev;
      e_lo = e_prev;
      lo_has_eval = prev_has_eval;
      a_hi = a;
      bracketed = true;
      break;
    }
    double dphi = et.g.dot(p);
    if (std::abs(dphi) <= -c2 * dphi0) {
      out.ok = true;
      out.alpha = a;
      out.x = std::move(xt);
      out.e = std::move(et);
      return out;
    }
    if (dphi >= 0.0) {
      a_lo = a;
      phi_lo = et.f;
      x_lo = xt;
      e_lo = et;
      lo_has_eval = true;
      a_hi = a_prev;
      bracketed = true;
      break;
    }
    a_prev = a;
    phi_prev = et.f;
    x_prev = std::move(xt);
    e_prev = std::move(et);
    prev_has_eval = true;
    if (a >= alpha_max) break;
    a = std::min(2.0 * a, alpha_max);
  }
  if (!bracketed) {
    // Ran off the expansion cap while still descending: take the last point.
    if (prev_has_eval && !armijo_fails(a_prev, phi_prev)) {
      out.ok = true;
      out.alpha = a_prev;
      out.x = std::move(x_prev);
      out.e = std::move(e_prev);
    }
    return out;
  }

  for (int j = 0; j < 30; ++j) {
    double am = 0.5 * (a_lo + a_hi);
    Vector xt = x + am * p;
    PointEval et = obj.eval(xt);
    if (armijo_fails(am, et.f) || et.f >= phi_lo) {
      a_hi = am;
      continue;
    }
    double dphi = et.g.dot(p);
    if (std::abs(dphi) <= -c2 * dphi0) {
      out.ok = true;
      out.alpha = am;
      out.x = std::move(xt);
      out.e = std::move(et);
      return out;
    }
    if (dphi * (a_hi - a_lo) >= 0.0) a_hi = a_lo;
    a_lo = am;
    phi_lo = et.f;
    x_lo = std::move(xt);
    e_lo = std::move(et);
    lo_has_eval = true;
  }
  // Curvature never satisfied within the budget; accept the best Armijo point.
  if (lo_has_eval && a_lo > 0.0) {
    out.ok = true;
    out.alpha = a_lo;
    out.x = std::move(x_lo);
    out.e = std::move(e_lo);
  }
  return out;
}

}  // namespace

OptimizerResult bfgs_minimize(const ScalarField& f, const GradField& grad, const Vector& x0,
                              const BfgsConfig& cfg) {
  const int d = static_cast<int>(x0.size());
  Objective obj(f, grad);

  OptimizerResult result;
  result.x_star = x0;

  Vector x = x0;
  PointEval e;
  bool grad_ok = false;
  try {
    e = obj.eval(x0);
    if (e.has_g) {
      Matrix h_inv = Matrix::Identity(d, d);
      for (int it = 0; it < cfg.max_iters; ++it) {
        double tol = cfg.grad_tol_rel * std::max(1.0, std::abs(e.f));
        if (e.g.norm() < tol) {
          grad_ok = true;
          break;
        }
        Vector p = -(h_inv * e.g);
        double dphi0 = p.dot(e.g);
        if (!(dphi0 < 0.0)) {
          h_inv.setIdentity();
          p = -e.g;
          dphi0 = -e.g.squaredNorm();
          if (dphi0 == 0.0) break;
        }
        LineSearchResult ls = line_search(obj, x, p, e.f, dphi0, cfg.c1, cfg.c2);
        if (!ls.ok) break;
        Vector s = ls.x - x;
        Vector yv = ls.e.g - e.g;
        double sy = s.dot(yv);
        if (sy > 1e-10 * s.norm() * yv.norm()) {
          double rho = 1.0 / sy;
          Vector hy = h_inv * yv;
          double yhy = yv.dot(hy);
          h_inv += -rho * (s * hy.transpose() + hy * s.transpose()) +
                   (rho * rho * yhy + rho) * (s * s.transpose());
        }
        x = std::move(ls.x);
        e = std::move(ls.e);
      }
      // Final gradient check also covers loop exhaustion.
      double tol = cfg.grad_tol_rel * std::max(1.0, std::abs(e.f));
      if (!grad_ok && e.g.norm() < tol) grad_ok = true;
    }
  } catch (const NonFiniteValue&) {
    grad_ok = false;  // a stencil walked into a zero-density wall
  }

  result.x_star = x;
  result.f_star = e.f;
  result.n_evals = obj.n_evals();
  result.converged = false;
  if (grad_ok) {
    try {
      Matrix h = fd_hessian(f, x);
      h = (0.5 * (h + h.transpose())).eval();
      result.hessian = h;
      Eigen::SelfAdjointEigenSolver<Matrix> es(h);
      double lo = es.eigenvalues().minCoeff();
      double hi = es.eigenvalues().maxCoeff();
      result.converged = hi > 0.0 && lo > cfg.hess_pd_rel * hi;
    } catch (const NonFiniteValue&) {
      result.converged = false;
    }
  }
  return result;
}

}  // namespace jams
