#include "kernels.hpp"

#include <cmath>

namespace jams {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void ensure_eval(const KernelContext& ctx, const Vector& x, StateEval& e) {
  if (!e.pi_valid) {
    e.log_pi = ctx.log_pi(x);
    e.pi_valid = true;
  }
  if (!e.q_valid) {
    e.log_q = all_mode_log_q(ctx.modes, ctx.params, x);
    e.q_valid = true;
  }
}

double tilde_of(const KernelContext& ctx, const StateEval& e, int i) {
  return tilde_log_from_parts(e.log_pi, e.log_q, ctx.log_weights, i);
}

// min(0, delta) with the degenerate-density guards: a -inf destination is
// always rejected; a -inf origin (unreachable in a healthy chain) is escaped.
double clamp_log_alpha(double tilde_x, double tilde_y, double extra) {
  if (tilde_y == kNegInf) return kNegInf;
  if (tilde_x == kNegInf) return 0.0;
  return std::min(0.0, tilde_y - tilde_x + extra);
}

bool accept_with(Rng& rng, double log_alpha) {
  if (log_alpha == 0.0) return true;
  if (log_alpha == kNegInf) return false;
  return std::log(rng.u01()) <= log_alpha;
}

// Draw the scaled elliptical noise for a proposal with lower factor L.
Vector elliptical_noise(const EllipticalKind& kind, int d, Rng& rng) {
  Vector z = rng.normal_vec(d);
  if (kind.family == EllipticalKind::kStudentT) {
    z *= std::sqrt(kind.dof / rng.chi_square(kind.dof));
  }
  return z;
}

}  // namespace

double local_log_acceptance(const KernelContext& ctx, const Vector& x, int i, const Vector& y) {
  StateEval ex, ey;
  ensure_eval(ctx, x, ex);
  ensure_eval(ctx, y, ey);
  return clamp_log_alpha(tilde_of(ctx, ex, i), tilde_of(ctx, ey, i), 0.0);
}

Vector local_propose_from_noise(const KernelContext& ctx, const ChainState& state, const Vector& z,
                                double t_draw) {
  const Matrix& l = ctx.params.sigma[state.i].chol_lower();
  const Vector lz = l.triangularView<Eigen::Lower>() * z;
  return state.x + std::sqrt(ctx.local_scale) * t_draw * lz;
}

MoveOutcome local_step(const KernelContext& ctx, const ChainState& state, Rng& rng,
                       StateEval* cur) {
  StateEval local_cache;
  StateEval& ex = cur ? *cur : local_cache;
  ensure_eval(ctx, state.x, ex);

  double t_draw = 1.0;
  Vector z = rng.normal_vec(static_cast<int>(state.x.size()));
  if (ctx.local_kind.family == EllipticalKind::kStudentT) {
    t_draw = std::sqrt(ctx.local_kind.dof / rng.chi_square(ctx.local_kind.dof));
  }
  Vector y = local_propose_from_noise(ctx, state, z, t_draw);

  StateEval ey;
  ensure_eval(ctx, y, ey);
  double log_alpha = clamp_log_alpha(tilde_of(ctx, ex, state.i), tilde_of(ctx, ey, state.i), 0.0);

  MoveOutcome out;
  out.move_type = MoveType::kLocal;
  out.log_alpha = log_alpha;
  out.accepted = accept_with(rng, log_alpha);
  if (out.accepted) {
    out.next = ChainState{std::move(y), state.i};
    ex = std::move(ey);
  } else {
    out.next = state;
  }
  return out;
}

Vector deterministic_jump_map(const ModeSet& modes, const AugmentedParams& params, const Vector& x,
                              int i, int k) {
  const Matrix& li = params.sigma[i].chol_lower();
  const Matrix& lk = params.sigma[k].chol_lower();
  Vector z = li.triangularView<Eigen::Lower>().solve(x - modes.mu[i]);
  return modes.mu[k] + lk.triangularView<Eigen::Lower>() * z;
}

double deterministic_jump_log_acceptance(const KernelContext& ctx, const Vector& x, int i,
                                         const Vector& y, int k) {
  StateEval ex, ey;
  ensure_eval(ctx, x, ex);
  ensure_eval(ctx, y, ey);
  double extra = std::log(ctx.params.jump_probs(k, i)) - std::log(ctx.params.jump_probs(i, k)) +
                 0.5 * (ctx.params.sigma[k].log_det() - ctx.params.sigma[i].log_det());
  return clamp_log_alpha(tilde_of(ctx, ex, i), tilde_of(ctx, ey, k), extra);
}

Vector independent_jump_propose(const KernelContext& ctx, const JumpKind& kind, int k, Rng& rng) {
  const Matrix& lk = ctx.params.sigma[k].chol_lower();
  Vector z = elliptical_noise(kind.proposal_family(), ctx.modes.dim(), rng);
  return ctx.modes.mu[k] + lk.triangularView<Eigen::Lower>() * z;
}

double independent_jump_log_acceptance(const KernelContext& ctx, const JumpKind& kind,
                                       const Vector& x, int i, const Vector& y, int k) {
  StateEval ex, ey;
  ensure_eval(ctx, x, ex);
  ensure_eval(ctx, y, ey);
  EllipticalKind family = kind.proposal_family();
  double r_i_x = elliptical_log_pdf(family, ctx.modes.mu[i], ctx.params.sigma[i], x);
  double r_k_y = elliptical_log_pdf(family, ctx.modes.mu[k], ctx.params.sigma[k], y);
  double extra = std::log(ctx.params.jump_probs(k, i)) - std::log(ctx.params.jump_probs(i, k)) +
                 r_i_x - r_k_y;
  return clamp_log_alpha(tilde_of(ctx, ex, i), tilde_of(ctx, ey, k), extra);
}

MoveOutcome jump_step(const KernelContext& ctx, const ChainState& state, const JumpKind& kind,
                      Rng& rng, StateEval* cur) {
  const int n = ctx.params.count();
  if (n == 1) return local_step(ctx, state, rng, cur);

  if (kind.flavor == JumpKind::kDeterministic) {
    double m = mahalanobis_sq(ctx.params.sigma[state.i].chol_lower(), state.x - ctx.modes.mu[state.i]);
    if (m > kind.radius) return local_step(ctx, state, rng, cur);
  }

  StateEval local_cache;
  StateEval& ex = cur ? *cur : local_cache;
  ensure_eval(ctx, state.x, ex);

  const int k = rng.discrete(ctx.params.jump_probs.row(state.i).transpose());

  Vector y;
  double extra = std::log(ctx.params.jump_probs(k, state.i)) -
                 std::log(ctx.params.jump_probs(state.i, k));
  if (kind.flavor == JumpKind::kDeterministic) {
    y = deterministic_jump_map(ctx.modes, ctx.params, state.x, state.i, k);
    extra += 0.5 * (ctx.params.sigma[k].log_det() - ctx.params.sigma[state.i].log_det());
  } else {
    y = independent_jump_propose(ctx, kind, k, rng);
    EllipticalKind family = kind.proposal_family();
    extra += elliptical_log_pdf(family, ctx.modes.mu[state.i], ctx.params.sigma[state.i], state.x) -
             elliptical_log_pdf(family, ctx.modes.mu[k], ctx.params.sigma[k], y);
  }

  StateEval ey;
  ensure_eval(ctx, y, ey);
  double log_alpha = clamp_log_alpha(tilde_of(ctx, ex, state.i), tilde_of(ctx, ey, k), extra);

  MoveOutcome out;
  out.move_type = MoveType::kJump;
  out.proposed_mode = k;
  out.log_alpha = log_alpha;
  out.accepted = accept_with(rng, log_alpha);
  if (out.accepted) {
    out.next = ChainState{std::move(y), k};
    ex = std::move(ey);
  } else {
    out.next = state;
  }
  return out;
}

}  // namespace jams
