#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adaptation.hpp"
#include "bfgs.hpp"
#include "kernels.hpp"

namespace jams {

struct BurninConfig {
  long long n_starts = 1500;
  Vector box_low, box_high;  // per-dimension start box
  double merge_q = 1.0;      // averaged squared-Mahalanobis merge threshold
  double b_acc = 1.1;        // inhomogeneity stopping threshold
  int max_rounds = 30;
  long long round0_len = 1000;  // round lengths 1000, 2000, 4000, ...
  AdaptationConfig adaptation;
  EllipticalKind q_kind = EllipticalKind::student_t(7.0);
  EllipticalKind local_kind = EllipticalKind::normal();
  BfgsConfig bfgs;

  void validate(int dim) const;
};

struct ModeFindStats {
  long long n_starts = 0;
  long long n_converged = 0;
  long long evals_min = 0;  // per-run joint (f, gradient) evaluations
  long long evals_max = 0;
  double evals_mean = 0.0;
  long long target_evals = 0;  // raw log-density evaluations incl. fd stencils
};

// Everything the main run needs to start sampling: the mode structure, the
// final matrices Sigma_{K,i} (which seed S_i, sigma_tilde_i and the published
// Sigma simultaneously), and the per-mode moment state accumulated during the
// covariance rounds.
struct BurninReport {
  std::string target_name;
  int dim = 0;
  ModeSet modes;
  std::vector<SpdMatrix> sigma0;
  std::vector<Vector> mode_mean;
  std::vector<long long> mode_count;
  int rounds_used = 0;
  std::vector<Vector> inhomogeneity;  // b_{k,i} for each completed round k
  long long eval_budget = 0;          // raw target evaluations, BFGS + chains
  bool round_limit_exceeded = false;
  ModeFindStats find_stats;
  // Pooled-residual state accumulated by the dominant mode's chain; the main
  // run adopts it so its pool starts at stationarity (empty when pooling is
  // off).
  Matrix pooled_residual;

  void validate() const;
};

// n i.i.d. uniform draws from the box (deterministic in the rng stream).
std::vector<Vector> sample_starts(const Vector& lo, const Vector& hi, long long n, Rng& rng);

// Sequential merge of converged optimisation results: a candidate joins the
// nearest existing mode when the averaged squared Mahalanobis distance
// (under both Hessians) is strictly below q, and the representative with the
// larger target density wins; otherwise it becomes a new mode.  The returned
// set is sorted by target log density, descending.
ModeSet merge_modes(const std::vector<OptimizerResult>& candidates, const Target& target,
                    double q);

// b = d * (sum 1/lambda) / (sum 1/sqrt(lambda))^2 over the eigenvalues of
// prev^{-1} curr; equals 1 iff the matrices are proportional.
double inhomogeneity_factor(const SpdMatrix& prev, const SpdMatrix& curr);

// Uniform starts + parallel BFGS + KKT filter + merge.
ModeSet find_modes(const Target& target, const BurninConfig& cfg, std::uint64_t seed, int workers,
                   ModeFindStats* stats = nullptr);

// Covariance-estimation rounds (jump-free chains, one per mode) given an
// already-discovered mode set.
BurninReport run_burnin_from_modes(const Target& target, const ModeSet& modes,
                                   const ModeFindStats& find_stats, const BurninConfig& cfg,
                                   std::uint64_t seed, int workers);

// Full Algorithm-3 pipeline: mode finding composed with the covariance rounds.
BurninReport run_burnin(const Target& target, const BurninConfig& cfg, std::uint64_t seed,
                        int workers);

}  // namespace jams
