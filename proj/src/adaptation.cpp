#include "adaptation.hpp"

#include <cmath>

namespace jams {

void AdaptationConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("adaptation: alpha must be in (0,1)");
  if (!(beta > 0.0)) throw ConfigError("adaptation: beta must be > 0");
  if (ac1 < 1 || ac2 < 1) throw ConfigError("adaptation: ac1 and ac2 must be >= 1");
  if (!(alpha_opt > 0.0 && alpha_opt < 1.0)) {
    throw ConfigError("adaptation: alpha_opt must be in (0,1)");
  }
  if (!(eps_w_tilde > 0.0 && eps_w_tilde < 1.0)) {
    throw ConfigError("adaptation: eps_w_tilde must be in (0,1)");
  }
  if (air_enabled) {
    if (!(air_c > 0.0) || !(air_kappa > 0.0)) throw ConfigError("adaptation: AIR c, kappa must be > 0");
    if (!(air_kappa_star > 0.0 && air_kappa_star < air_kappa)) {
      throw ConfigError("adaptation: AIR kappa_star must be in (0, kappa)");
    }
  }
  if (!(local_scale > 0.0)) throw ConfigError("adaptation: local_scale must be > 0");
  if (!(pool_window >= 0.0)) throw ConfigError("adaptation: pool_window must be >= 0");
}

Matrix ModeMoments::covariance() const {
  if (n < 2) throw Error(ErrorCode::Numeric, "ModeMoments: covariance requires n >= 2");
  return m2 / static_cast<double>(n - 1);
}

Matrix ModeMoments::block_covariance() const {
  if (n_c < 2) throw Error(ErrorCode::Numeric, "ModeMoments: block covariance requires n_c >= 2");
  return m2_c / static_cast<double>(n_c - 1);
}

void ModeMoments::reset_block() {
  n_c = 0;
  mean_c.setZero();
  m2_c.setZero();
}

void ModeMoments::set_covariance(const Matrix& cov) {
  if (n < 2) throw Error(ErrorCode::Numeric, "ModeMoments: set_covariance requires n >= 2");
  m2 = cov * static_cast<double>(n - 1);
}

void update_moments(ModeMoments& mm, const Vector& x) {
  mm.n += 1;
  Vector delta = x - mm.mean;
  mm.mean += delta / static_cast<double>(mm.n);
  mm.m2 += delta * (x - mm.mean).transpose();

  const bool to_a = (mm.n_obs / std::max<long long>(mm.block_len, 1)) % 2 == 0;
  mm.n_obs += 1;
  long long& nh = to_a ? mm.n_a : mm.n_b;
  Vector& mh = to_a ? mm.mean_a : mm.mean_b;
  Matrix& m2h = to_a ? mm.m2_a : mm.m2_b;
  nh += 1;
  Vector dh = x - mh;
  mh += dh / static_cast<double>(nh);
  m2h += dh * (x - mh).transpose();

  mm.n_c += 1;
  Vector dc = x - mm.mean_c;
  mm.mean_c += dc / static_cast<double>(mm.n_c);
  mm.m2_c += dc * (x - mm.mean_c).transpose();
}

void scaling_update(ModeMoments& mm, double local_log_alpha, const AdaptationConfig& cfg) {
  double acc = std::exp(std::min(0.0, local_log_alpha));
  double factor =
      std::exp(std::pow(static_cast<double>(std::max<long long>(mm.n, 1)), -cfg.alpha) *
               (acc - cfg.alpha_opt));
  mm.sigma_tilde *= factor;
}

namespace {

SpdMatrix finalize_refresh(Matrix sigma, const AdaptationConfig& cfg) {
  sigma = (0.5 * (sigma + sigma.transpose())).eval();
  // Eigenvalues are >= beta by construction; the upper clamp is checked
  // cheaply first (trace bounds the largest eigenvalue of a PSD matrix).
  if (sigma.trace() > cfg.sigma_eigen_cap) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    Vector ev = es.eigenvalues().cwiseMin(cfg.sigma_eigen_cap).cwiseMax(cfg.beta);
    sigma = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    sigma = (0.5 * (sigma + sigma.transpose())).eval();
  }
  return SpdMatrix(std::move(sigma));
}

// Squared Frobenius norm of L^{-1} M L^{-T} for a lower-triangular L.
double whitened_norm2(const Matrix& chol_lower, const Matrix& m) {
  Matrix w = chol_lower.triangularView<Eigen::Lower>().solve(m);
  w = chol_lower.triangularView<Eigen::Lower>().solve(w.transpose().eval());
  return w.squaredNorm();
}

}  // namespace

SpdMatrix covariance_refresh(const ModeMoments& mm, const AdaptationConfig& cfg) {
  const int d = static_cast<int>(mm.mean.size());
  Matrix sigma = Matrix::Identity(d, d) * cfg.beta;
  if (mm.n >= 2) sigma += mm.covariance();
  return finalize_refresh(std::move(sigma), cfg);
}

double shrink_intensity(const ModeMoments& mm, const SpdMatrix& anchor) {
  const int d = static_cast<int>(mm.mean.size());
  const long long need = std::max<long long>(d + 2, 64);
  if (mm.n < 2 || mm.n_a < need || mm.n_b < need) return 1.0;
  const Matrix& chol = anchor.chol_lower();
  const Matrix half_gap =
      mm.m2_a / static_cast<double>(mm.n_a - 1) - mm.m2_b / static_cast<double>(mm.n_b - 1);
  const double noise = 0.5 * whitened_norm2(chol, half_gap);
  const double total = whitened_norm2(chol, mm.covariance() - anchor.value());
  if (!std::isfinite(noise) || !std::isfinite(total) || !(total > 0.0)) return 1.0;
  return std::min(1.0, noise / total);
}

SpdMatrix covariance_refresh(const ModeMoments& mm, const SpdMatrix& anchor,
                             const AdaptationConfig& cfg) {
  const int d = static_cast<int>(mm.mean.size());
  Matrix sigma = Matrix::Identity(d, d) * cfg.beta;
  if (mm.n >= 2) {
    const double rho = shrink_intensity(mm, anchor);
    sigma += rho * anchor.value() + (1.0 - rho) * mm.covariance();
  } else {
    sigma += anchor.value();
  }
  return finalize_refresh(std::move(sigma), cfg);
}

void PooledResidual::ingest(const Matrix& block_cov, long long n_block, const SpdMatrix& anchor,
                            double rho) {
  const int d = static_cast<int>(e.rows());
  if (!enabled() || n_block < d + 2 || !(rho > 0.0)) return;
  const Matrix& chol = anchor.chol_lower();
  Matrix g = chol.triangularView<Eigen::Lower>().solve(block_cov - anchor.value());
  g = chol.triangularView<Eigen::Lower>().solve(g.transpose().eval());
  g = (0.5 * (g + g.transpose())).eval();
  const double wt = std::min(1.0, 2.0 * static_cast<double>(n_block) / window) * std::min(rho, 1.0);
  e = ((1.0 - wt) * e + wt * g).eval();
  n_blocks += 1;
  // Keep I + E comfortably positive definite: per-direction deformations are
  // clamped to [0.1, 10] times the anchor.
  Eigen::SelfAdjointEigenSolver<Matrix> es(e);
  if (es.eigenvalues().minCoeff() < -0.9 || es.eigenvalues().maxCoeff() > 9.0) {
    Vector ev = es.eigenvalues().cwiseMax(-0.9).cwiseMin(9.0);
    e = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    e = (0.5 * (e + e.transpose())).eval();
  }
}

Matrix PooledResidual::deform(const SpdMatrix& anchor) const {
  const int d = static_cast<int>(e.rows());
  const Matrix& chol = anchor.chol_lower();
  return chol * (Matrix::Identity(d, d) + e) * chol.transpose();
}

SpdMatrix covariance_refresh(const ModeMoments& mm, const SpdMatrix& anchor,
                             const PooledResidual& pool, const AdaptationConfig& cfg) {
  if (!pool.enabled()) return covariance_refresh(mm, anchor, cfg);
  const int d = static_cast<int>(mm.mean.size());
  Matrix sigma = Matrix::Identity(d, d) * cfg.beta;
  if (mm.n >= 2) {
    const double rho = shrink_intensity(mm, anchor);
    sigma += rho * pool.deform(anchor) + (1.0 - rho) * mm.covariance();
  } else {
    sigma += pool.deform(anchor);
  }
  return finalize_refresh(std::move(sigma), cfg);
}

Vector weight_update(const std::vector<long long>& counts, double eps_w) {
  const int n_modes = static_cast<int>(counts.size());
  if (n_modes < 1) throw ConfigError("weight_update: empty counts");
  if (!(eps_w > 0.0) || eps_w * n_modes >= 1.0) {
    throw ConfigError("weight_update: need 0 < eps_w * N < 1");
  }
  long long total = 0;
  for (long long c : counts) {
    if (c < 0) throw ConfigError("weight_update: negative count");
    total += c;
  }
  Vector w(n_modes);
  if (total == 0) {
    w.setConstant(1.0 / n_modes);
    return w;
  }
  double w_add = static_cast<double>(total) / (1.0 / eps_w - n_modes);
  double denom = static_cast<double>(total) + n_modes * w_add;
  for (int i = 0; i < n_modes; ++i) w[i] = (static_cast<double>(counts[i]) + w_add) / denom;
  return w;
}

AirSchedule::AirSchedule(const AdaptationConfig& cfg, Rng rng)
    : c_(cfg.air_c), kappa_(cfg.air_kappa), kappa_star_(cfg.air_kappa_star), rng_(rng) {}

long long AirSchedule::next() {
  k_ += 1;
  double kd = static_cast<double>(k_);
  long long n_k = static_cast<long long>(std::ceil(c_ * std::pow(kd, kappa_)));
  long long jitter_max = static_cast<long long>(std::floor(std::pow(kd, kappa_star_)));
  long long u = jitter_max > 0
                    ? static_cast<long long>(rng_.uniform_int_inclusive(
                          static_cast<std::uint64_t>(jitter_max)))
                    : 0;
  cum_ += n_k + u;
  return cum_;
}

CompactRegions make_compact_regions(const ModeSet& modes, const std::vector<SpdMatrix>& sigma0) {
  const int n = modes.count();
  double diameter = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      diameter = std::max(diameter, (modes.mu[i] - modes.mu[j]).norm());
    }
  }
  double lambda_max = 0.0;
  for (const auto& s : sigma0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.value());
    lambda_max = std::max(lambda_max, es.eigenvalues().maxCoeff());
  }
  double r = 2.0 * diameter + 100.0 * std::sqrt(static_cast<double>(modes.dim()) * lambda_max);
  CompactRegions regions;
  regions.centers = modes.mu;
  regions.radius.assign(n, r);
  return regions;
}

bool in_compact_set(const CompactRegions& regions, const Vector& x, int i) {
  return (x - regions.centers[i]).norm() <= regions.radius[i];
}

}  // namespace jams
