#pragma once

#include <limits>

#include "augmented.hpp"
#include "rng.hpp"

namespace jams {

// Augmented chain state.  Mode indices are 0-based throughout the C++ API;
// reports and output files use 1-based labels.
struct ChainState {
  Vector x;
  int i = 0;
};

enum class MoveType { kLocal, kJump };

// Which jump kernel to use.  `radius` is the squared-Mahalanobis threshold of
// the jumping region (deterministic jumps are attempted only from inside it).
struct JumpKind {
  enum Flavor { kDeterministic, kIndependentNormal, kIndependentT };
  Flavor flavor = kDeterministic;
  double radius = std::numeric_limits<double>::infinity();  // Deterministic only
  double dof = 7.0;                                         // IndependentT only

  static JumpKind deterministic(double radius) { return {kDeterministic, radius, 0.0}; }
  static JumpKind independent_normal() {
    return {kIndependentNormal, std::numeric_limits<double>::infinity(), 0.0};
  }
  static JumpKind independent_t(double dof) {
    return {kIndependentT, std::numeric_limits<double>::infinity(), dof};
  }

  EllipticalKind proposal_family() const {
    return flavor == kIndependentT ? EllipticalKind::student_t(dof) : EllipticalKind::normal();
  }
};

struct MoveOutcome {
  ChainState next;
  bool accepted = false;
  MoveType move_type = MoveType::kLocal;
  int proposed_mode = -1;  // jump destination mode; -1 for local moves
  double log_alpha = 0.0;
};

// Everything a kernel step reads.  References are borrowed from the owning
// sampler; `local_scale` multiplies Sigma_i to form the local proposal
// covariance (1 during the scaling phase, 2.38^2/d afterwards) and is kept
// current by the owner.  log_weights must equal params.weights.log(); call
// refresh_weights() after any weight update.
struct KernelContext {
  const Target& target;
  const ModeSet& modes;
  const AugmentedParams& params;
  EllipticalKind local_kind = EllipticalKind::normal();
  double local_scale = 1.0;
  Vector log_weights;
  mutable long long n_target_evals = 0;

  KernelContext(const Target& t, const ModeSet& m, const AugmentedParams& p)
      : target(t), modes(m), params(p) {
    refresh_weights();
  }
  void refresh_weights() { log_weights = params.weights.array().log(); }
  double log_pi(const Vector& x) const {
    ++n_target_evals;
    return target.log_pdf(x);
  }
};

// Cached evaluation of the current state, so one iteration costs one target
// evaluation.  pi_valid is tied to x alone; q_valid additionally to the
// params snapshot — the owner clears it whenever params change.
struct StateEval {
  double log_pi = 0.0;
  Vector log_q;
  bool pi_valid = false;
  bool q_valid = false;
  void invalidate() { pi_valid = q_valid = false; }
  void invalidate_q() { q_valid = false; }
};

// min(0, log pi~(y,i) - log pi~(x,i)) for a symmetric local proposal.
double local_log_acceptance(const KernelContext& ctx, const Vector& x, int i, const Vector& y);

// Local proposal point from externally supplied noise: x + sqrt(local_scale) *
// L_i z * t_draw (test injection point; t_draw = sqrt(dof/W) for t proposals).
Vector local_propose_from_noise(const KernelContext& ctx, const ChainState& state, const Vector& z,
                                double t_draw = 1.0);

// One random-walk move at the current mode; never changes i.
MoveOutcome local_step(const KernelContext& ctx, const ChainState& state, Rng& rng,
                       StateEval* cur = nullptr);

// y = mu_k + L_k L_i^{-1} (x - mu_i), preserving the Mahalanobis norm.
Vector deterministic_jump_map(const ModeSet& modes, const AugmentedParams& params, const Vector& x,
                              int i, int k);

// min(0, [pi~(y,k) - pi~(x,i)] + log a_ki - log a_ik + (log det Sigma_k - log det Sigma_i)/2)
double deterministic_jump_log_acceptance(const KernelContext& ctx, const Vector& x, int i,
                                         const Vector& y, int k);

// Draw from the jump proposal at mode k (Normal or t per `kind`).
Vector independent_jump_propose(const KernelContext& ctx, const JumpKind& kind, int k, Rng& rng);

// min(0, [pi~(y,k) - pi~(x,i)] + log a_ki + log R_i(x) - log a_ik - log R_k(y))
double independent_jump_log_acceptance(const KernelContext& ctx, const JumpKind& kind,
                                       const Vector& x, int i, const Vector& y, int k);

// One jump attempt per Algorithm 1/4 semantics: with a single mode, or for a
// deterministic jump attempted outside the jumping region, exactly one local
// move is executed instead and recorded with move_type=Local.
MoveOutcome jump_step(const KernelContext& ctx, const ChainState& state, const JumpKind& kind,
                      Rng& rng, StateEval* cur = nullptr);

}  // namespace jams
