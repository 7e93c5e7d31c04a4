#pragma once

#include <vector>

#include "numerics.hpp"
#include "targets.hpp"

namespace jams {

// Family of elliptical distributions used for the mode kernels Q_i and for
// jump proposals: Gaussian, or Student t parameterised by location and scale
// (shape) matrix.
struct EllipticalKind {
  enum Family { kNormal, kStudentT };
  Family family = kNormal;
  double dof = 7.0;  // Student t degrees of freedom; must be > 2

  static EllipticalKind normal() { return {kNormal, 0.0}; }
  static EllipticalKind student_t(double dof) { return {kStudentT, dof}; }
  void validate() const {
    if (family == kStudentT && !(dof > 2.0)) {
      throw ConfigError("student t kernels require dof > 2");
    }
  }
};

// Fixed mode structure discovered during burn-in: centres mu_i, Hessians of
// -log pi at the centres, and the target log density there.  Modes are kept
// sorted by log_pi descending, so index 0 is the dominant mode.
struct ModeSet {
  std::vector<Vector> mu;
  std::vector<Matrix> hessian;
  std::vector<double> log_pi;

  int count() const { return static_cast<int>(mu.size()); }
  int dim() const { return mu.empty() ? 0 : static_cast<int>(mu[0].size()); }
  void validate() const;
};

// Adapted parameters of the augmented target: per-mode matrices Sigma_i (with
// cached Cholesky factors), mode weights, and the jump transition matrix a.
struct AugmentedParams {
  std::vector<SpdMatrix> sigma;
  Vector weights;      // linear scale, each > 0, sums to 1
  Matrix jump_probs;   // zero diagonal, rows sum to 1 when count > 1
  EllipticalKind q_kind;

  int count() const { return static_cast<int>(sigma.size()); }
  void validate(int dim) const;
};

// Uniform weights and the fixed jump matrix a_ii = 0, a_ik = 1/(N-1).
Vector uniform_weights(int n);
Matrix uniform_jump_probs(int n);

// log density of the elliptical distribution `kind` with centre mu and scale
// matrix sigma, evaluated at x.
double elliptical_log_pdf(const EllipticalKind& kind, const Vector& mu, const SpdMatrix& sigma,
                          const Vector& x);

// log Q_i(x): the mode-i kernel density.
double q_log_pdf(const ModeSet& modes, const AugmentedParams& params, int i, const Vector& x);

// All N kernel log densities at x in one pass (the shared work of pi~).
Vector all_mode_log_q(const ModeSet& modes, const AugmentedParams& params, const Vector& x);

// log pi~(x, i) assembled from precomputed parts:
//   log pi(x) + log w_i + log q_i - logsumexp_j(log w_j + log q_j).
double tilde_log_from_parts(double log_pi_x, const Vector& log_q, const Vector& log_weights,
                            int i);

// log pi~(x, i) from scratch (reference path; kernels cache the parts).
double tilde_pi_log_pdf(const Target& target, const ModeSet& modes, const AugmentedParams& params,
                        const Vector& x, int i);

}  // namespace jams
