#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "augmented.hpp"
#include "rng.hpp"

namespace jams {

// Tuning constants of the adaptation scheme.
struct AdaptationConfig {
  double alpha = 0.7;        // scaling-phase decay exponent
  double beta = 1e-4;        // ridge added to every published Sigma
  long long ac1 = 1000;      // scaling phase lasts while n_i < ac1
  long long ac2 = 1000;      // covariance refresh cadence thereafter
  double alpha_opt = 0.234;  // local acceptance target
  double eps_w_tilde = 0.01; // weight floor before division by N
  bool air_enabled = false;
  double air_c = 100.0;
  double air_kappa = 1.0;
  double air_kappa_star = 0.5;
  double local_scale = 1.0;  // 2.38^2/d, resolved per target dimension
  double sigma_eigen_cap = std::numeric_limits<double>::infinity();  // M = 1e6 * lambda_M
  double pool_window = 0.0;  // pooled-residual window V in samples (0 = off)

  void validate() const;
  static long long auto_ac1(int dim) {
    return std::max<long long>(1000, static_cast<long long>(dim) * dim / 2);
  }
  // Default pooled-residual window.  Growing it as d sqrt(d) keeps the
  // estimator spread carried by the pool on the d-scaling the covariance
  // rounds themselves produce (their length grows roughly quadratically, so
  // the whitened spread d^2 tau / V shrinks relative to dimension).
  static double auto_pool_window(int dim) {
    return 500.0 * static_cast<double>(dim) * std::sqrt(static_cast<double>(dim));
  }
};

// Per-mode running moments plus the scaling-phase matrix.  Besides the
// cumulative moments, samples are split into two half-estimates by
// alternating blocks of `block_len` ingests; comparing the halves gives a
// sampling-noise scale for the covariance estimate that needs no
// autocorrelation-time input.
struct ModeMoments {
  long long n = 0;
  Vector mean;
  Matrix m2;           // sum of outer products of deviations; cov = m2/(n-1)
  Matrix sigma_tilde;  // scaling-phase matrix (published as sigma_tilde + beta I)

  long long block_len = 1000;  // half-assignment block (>= a few mixing times)
  long long n_obs = 0;         // raw ingest count driving the block parity
  long long n_a = 0, n_b = 0;
  Vector mean_a, mean_b;
  Matrix m2_a, m2_b;

  // Current refresh block, reset whenever the pooled residual consumes it.
  long long n_c = 0;
  Vector mean_c;
  Matrix m2_c;

  explicit ModeMoments(int dim)
      : mean(Vector::Zero(dim)),
        m2(Matrix::Zero(dim, dim)),
        sigma_tilde(Matrix::Identity(dim, dim)),
        mean_a(Vector::Zero(dim)),
        mean_b(Vector::Zero(dim)),
        m2_a(Matrix::Zero(dim, dim)),
        m2_b(Matrix::Zero(dim, dim)),
        mean_c(Vector::Zero(dim)),
        m2_c(Matrix::Zero(dim, dim)) {}
  ModeMoments(int dim, Matrix sigma0) : ModeMoments(dim) { sigma_tilde = std::move(sigma0); }

  Matrix covariance() const;  // unbiased; requires n >= 2
  Matrix block_covariance() const;  // over the current block; requires n_c >= 2
  void reset_block();
  // Reset the accumulated covariance to `cov` keeping n and mean (used when
  // burn-in hands over S_i := Sigma_K).  The half accumulators are left
  // untouched, so they keep reflecting directly ingested samples only.
  void set_covariance(const Matrix& cov);
};

// Residual of the per-mode covariance estimates around their anchors, pooled
// across modes in anchor-whitened coordinates (where the modes are
// exchangeable).  Each refresh block contributes
//   G = L_i^{-1} (S_block - T_i) L_i^{-T},
// averaged into E with weight min(1, 2 n_block / window) * rho_i, an
// exponentially weighted mean whose effective length is `window`.  Publishing
// composes the same E into every anchor as L_i (I + E) L_i^T, so all modes
// carry one shared estimate of the residual instead of independent per-mode
// draws: mode-hopping maps that transport shape between modes stay mutually
// consistent, while proposals evaluated against a single mode see the full
// estimator spread.  rho_i (see shrink_intensity) gates contributions so a
// mode whose data has rejected its anchor neither feeds the pool nor follows
// it.
struct PooledResidual {
  double window = 0.0;  // effective sample count V; 0 disables the pool
  Matrix e;             // symmetric deformation in whitened coordinates
  long long n_blocks = 0;

  PooledResidual() = default;
  PooledResidual(int dim, double window) : window(window), e(Matrix::Zero(dim, dim)) {}

  bool enabled() const { return window > 0.0 && e.size() > 0; }
  void ingest(const Matrix& block_cov, long long n_block, const SpdMatrix& anchor, double rho);
  Matrix deform(const SpdMatrix& anchor) const;  // L (I + E) L^T
};

// Compact sets A_i: Euclidean balls around the mode centres with the common
// radius 2 D_C + 100 sqrt(d lambda_M).
struct CompactRegions {
  std::vector<Vector> centers;
  std::vector<double> radius;
};

// One-pass mean/covariance update (Welford); includes rejected-move duplicates
// by design since the chain feeds x_{n+1} unconditionally.
void update_moments(ModeMoments& mm, const Vector& x);

// Scaling-phase step: sigma_tilde *= exp(n^{-alpha} (exp(local_log_alpha) - alpha_opt)).
// Call only while n < ac1 and only after a local move; the published local
// covariance is sigma_tilde + beta I.
void scaling_update(ModeMoments& mm, double local_log_alpha, const AdaptationConfig& cfg);

// Covariance-phase refresh: S_i + beta I, spectrally clamped into
// [beta I, sigma_eigen_cap I] should the estimate escape those bounds.
SpdMatrix covariance_refresh(const ModeMoments& mm, const AdaptationConfig& cfg);

// Shrinkage weight of the anchor matrix in the anchored refresh below.
// Working in coordinates whitened by `anchor` (G = L^{-1} M L^{-T}), the
// half-sample split gives a noise scale ||G_A - G_B||_F^2 / 4 for the full
// estimate, and ||G_S - I||_F^2 measures its total deviation from the anchor.
// The weight is their ratio clamped to [0, 1], with a factor-2 margin in
// favour of the anchor: the alternating-block split under-counts noise
// through boundary autocorrelation, and a genuine shape mismatch is O(1)
// while noise decays like 1/n, so it still takes over quickly.  Returns 1
// while either half holds fewer than max(dim + 2, 64) samples.
double shrink_intensity(const ModeMoments& mm, const SpdMatrix& anchor);

// Anchored refresh: rho * anchor + (1 - rho) * S_i + beta I with
// rho = shrink_intensity(mm, anchor), clamped like the plain refresh.  Keeps
// the published matrix at the anchor while the sample estimate is consistent
// with it up to sampling noise (e.g. a Gaussian mode whose anchor is the
// inverse Hessian), and hands over to the empirical covariance once the data
// shows a systematic difference.
SpdMatrix covariance_refresh(const ModeMoments& mm, const SpdMatrix& anchor,
                             const AdaptationConfig& cfg);

// Anchored refresh with the anchor deformed by the pooled residual:
// rho * L (I + E) L^T + (1 - rho) * S_i + beta I.
SpdMatrix covariance_refresh(const ModeMoments& mm, const SpdMatrix& anchor,
                             const PooledResidual& pool, const AdaptationConfig& cfg);

// w_i = (n_i + w_add) / (n + N w_add) with w_add = n / (1/eps_w - N); the
// floor guarantees w_i >= eps_w.  eps_w * N must be < 1.
Vector weight_update(const std::vector<long long>& counts, double eps_w);

// Update times of the adaptive-increasingly-rare schedule:
//   N*_j = sum_{k<=j} (n_k + U_k), n_k = ceil(c k^kappa), U_k ~ U{0..floor(k^kappa*)}.
class AirSchedule {
 public:
  AirSchedule(const AdaptationConfig& cfg, Rng rng);
  long long next();  // strictly increasing sequence

 private:
  double c_, kappa_, kappa_star_;
  long long k_ = 0;
  long long cum_ = 0;
  Rng rng_;
};

CompactRegions make_compact_regions(const ModeSet& modes, const std::vector<SpdMatrix>& sigma0);

// Closed-ball membership test for A_i.
bool in_compact_set(const CompactRegions& regions, const Vector& x, int i);

}  // namespace jams
