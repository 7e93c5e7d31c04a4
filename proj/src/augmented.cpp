#include "augmented.hpp"

#include <cmath>

namespace jams {

void ModeSet::validate() const {
  if (mu.empty()) throw ConfigError("mode set is empty");
  if (hessian.size() != mu.size() || log_pi.size() != mu.size()) {
    throw ConfigError("mode set: inconsistent field lengths");
  }
  const int d = dim();
  for (const auto& m : mu) {
    if (static_cast<int>(m.size()) != d || !m.allFinite()) {
      throw ConfigError("mode set: bad mode centre");
    }
  }
  for (const auto& h : hessian) {
    if (h.rows() != d || h.cols() != d || !h.allFinite()) {
      throw ConfigError("mode set: bad Hessian");
    }
  }
}

void AugmentedParams::validate(int dim) const {
  const int n = count();
  if (n < 1) throw ConfigError("augmented params: no modes");
  q_kind.validate();
  for (const auto& s : sigma) {
    if (s.dim() != dim) throw ConfigError("augmented params: Sigma dimension mismatch");
  }
  if (static_cast<int>(weights.size()) != n) {
    throw ConfigError("augmented params: weight count mismatch");
  }
  if (weights.minCoeff() <= 0.0 || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw ConfigError("augmented params: weights must be positive and sum to 1");
  }
  if (jump_probs.rows() != n || jump_probs.cols() != n) {
    throw ConfigError("augmented params: jump matrix shape mismatch");
  }
  for (int i = 0; i < n; ++i) {
    if (jump_probs(i, i) != 0.0) throw ConfigError("augmented params: jump matrix diagonal not 0");
    if (jump_probs.row(i).minCoeff() < 0.0) {
      throw ConfigError("augmented params: negative jump probability");
    }
    if (n > 1 && std::abs(jump_probs.row(i).sum() - 1.0) > 1e-9) {
      throw ConfigError("augmented params: jump matrix row does not sum to 1");
    }
  }
}

Vector uniform_weights(int n) { return Vector::Constant(n, 1.0 / n); }

Matrix uniform_jump_probs(int n) {
  if (n == 1) return Matrix::Zero(1, 1);
  Matrix a = Matrix::Constant(n, n, 1.0 / (n - 1));
  a.diagonal().setZero();
  return a;
}

double elliptical_log_pdf(const EllipticalKind& kind, const Vector& mu, const SpdMatrix& sigma,
                          const Vector& x) {
  const double d = static_cast<double>(x.size());
  double q = mahalanobis_sq(sigma.chol_lower(), x - mu);
  if (kind.family == EllipticalKind::kNormal) {
    return -0.5 * d * std::log(2.0 * M_PI) - 0.5 * sigma.log_det() - 0.5 * q;
  }
  const double nu = kind.dof;
  return std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) - 0.5 * d * std::log(nu * M_PI) -
         0.5 * sigma.log_det() - 0.5 * (nu + d) * std::log1p(q / nu);
}

double q_log_pdf(const ModeSet& modes, const AugmentedParams& params, int i, const Vector& x) {
  return elliptical_log_pdf(params.q_kind, modes.mu[i], params.sigma[i], x);
}

Vector all_mode_log_q(const ModeSet& modes, const AugmentedParams& params, const Vector& x) {
  const int n = params.count();
  Vector q(n);
  for (int i = 0; i < n; ++i) q[i] = q_log_pdf(modes, params, i, x);
  return q;
}

double tilde_log_from_parts(double log_pi_x, const Vector& log_q, const Vector& log_weights,
                            int i) {
  Vector terms = log_weights + log_q;
  return log_pi_x + terms[i] - logsumexp(terms);
}

double tilde_pi_log_pdf(const Target& target, const ModeSet& modes, const AugmentedParams& params,
                        const Vector& x, int i) {
  Vector log_q = all_mode_log_q(modes, params, x);
  Vector log_w = params.weights.array().log();
  return tilde_log_from_parts(target.log_pdf(x), log_q, log_w, i);
}

}  // namespace jams
