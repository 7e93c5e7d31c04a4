#pragma once

#include <functional>
#include <optional>

#include "burnin.hpp"

namespace jams {

// Per-iteration behaviour switches shared by the main run and the burn-in
// rounds (which run the same engine with epsilon = 0 and frozen weights).
struct EngineOptions {
  double epsilon = 0.1;
  JumpKind jump_kind = JumpKind::independent_normal();
  EllipticalKind local_kind = EllipticalKind::normal();
  AdaptationConfig adapt;
  bool update_weights = true;
  bool air_mode = false;          // Algorithm-4 gating + AIR update times
  CompactRegions regions;         // compact sets A_i (air_mode only)
  std::uint64_t air_stream_seed = 0;
  // Per-mode anchors for the covariance refresh (empty = plain S_i + beta I).
  // Burn-in anchors at H_i^{-1}, the main run at the burn-in result; see
  // covariance_refresh(mm, anchor, cfg).
  std::vector<SpdMatrix> sigma_ref;
  // Pooled covariance residual shared by all modes (window 0 = off); `pool`
  // carries the window plus any state handed over from burn-in.  pool_compose
  // selects whether published matrices include the deformation: burn-in
  // chains only accumulate, since each runs a single mode and there is
  // nothing to pool across until the states merge at handover.
  PooledResidual pool;
  bool pool_compose = false;
};

// One augmented chain: move execution plus all in-loop adaptation.  Owns the
// mutable parameters; the mode set and target are borrowed and must outlive
// the engine.
class ChainEngine {
 public:
  ChainEngine(const Target& target, const ModeSet& modes, AugmentedParams params,
              std::vector<ModeMoments> moments, ChainState init, EngineOptions opt, Rng rng);
  ChainEngine(const ChainEngine&) = delete;
  ChainEngine& operator=(const ChainEngine&) = delete;

  MoveOutcome step();
  void run(long long n);

  const ChainState& state() const { return state_; }
  const AugmentedParams& params() const { return params_; }
  const ModeMoments& moments(int i) const { return moments_[i]; }
  const PooledResidual& pool() const { return pool_; }
  const std::vector<long long>& obs_counts() const { return obs_counts_; }
  long long iterations() const { return n_total_; }
  long long n_target_evals() const { return ctx_.n_target_evals; }

  // Instrumentation for tests and reports.
  long long scaling_updates() const { return n_scaling_updates_; }
  long long covariance_refreshes() const { return n_refreshes_; }
  long long param_updates() const { return n_param_updates_; }
  long long gated_skips() const { return n_gated_skips_; }

  // Between-round exchange hooks (burn-in).
  void set_sigma(int i, SpdMatrix s);
  void set_rng(Rng rng) { rng_ = std::move(rng); }

 private:
  void apply_param_update(const MoveOutcome& out, int im);
  void refresh_sigma(int im);

  const Target& target_;
  const ModeSet& modes_;
  AugmentedParams params_;
  EngineOptions opt_;
  KernelContext ctx_;
  std::vector<ModeMoments> moments_;
  std::vector<long long> obs_counts_;
  ChainState state_;
  StateEval cur_;
  PooledResidual pool_;
  Rng rng_;
  std::optional<AirSchedule> air_;
  double eps_w_ = 0.0;
  long long next_air_ = -1;
  long long n_total_ = 0;
  long long n_scaling_updates_ = 0;
  long long n_refreshes_ = 0;
  long long n_param_updates_ = 0;
  long long n_gated_skips_ = 0;
};

struct RunConfig {
  double epsilon = 0.1;
  long long n_iters = 500000;
  JumpKind jump_kind = JumpKind::deterministic(std::numeric_limits<double>::infinity());
  EllipticalKind local_kind = EllipticalKind::normal();
  EllipticalKind q_kind = EllipticalKind::student_t(7.0);
  AdaptationConfig adaptation;
  std::uint64_t seed = 0;
  long long record_stride = 1;
  long long discard = 0;          // recorded samples start after this many iterations
  long long snapshot_stride = 0;  // 0 = no parameter snapshots
  bool air_mode = false;
  bool store_samples = true;      // in-memory retention (auto-capped, see RunRecord)

  void validate() const;
};

struct SampleRow {
  long long iter;  // 1-based iteration number
  int mode;        // 0-based mode index
  MoveType move;
  bool accepted;
  Vector x;
};

using SampleSink = std::function<void(const SampleRow&)>;

// Counters always cover every iteration; `samples` holds the recorded rows
// only when storage is enabled and the run is small enough (at most 1e7
// stored values) — larger runs must stream through a SampleSink instead.
struct RunRecord {
  std::vector<SampleRow> samples;
  Matrix jump_attempts, jump_accepts;  // (from, to)
  std::vector<long long> local_attempts, local_accepts;  // by mode
  std::vector<long long> occupancy;                      // over recorded samples
  Vector mean;                                           // over recorded samples
  long long n_iters = 0;
  long long n_recorded = 0;
  long long n_target_evals = 0;
  double wall_seconds = 0.0;
  Vector final_weights;
  std::vector<std::pair<long long, Vector>> weight_snapshots;
  long long scaling_updates = 0;
  long long covariance_refreshes = 0;
  long long gated_skips = 0;
};

// The main loop: start at (mu_0, 0) (the dominant mode), continue the
// adaptation state accumulated during burn-in, and run cfg.n_iters
// iterations.  Deterministic given (report, cfg, seed).
RunRecord run_chain(const Target& target, const BurninReport& report, const RunConfig& cfg,
                    const SampleSink& sink = nullptr);

Vector estimate_mean(const RunRecord& record);
double rmse(const RunRecord& record, const Vector& truth);

struct AcceptanceSummary {
  Matrix jump_attempts, jump_accepts;
  std::vector<long long> local_attempts, local_accepts;

  // Rates are absent (nullopt) when nothing was attempted.
  std::optional<double> jump_rate(int from, int to) const;
  std::optional<double> jump_rate_from(int from) const;
  std::optional<double> jump_rate_overall() const;
  std::optional<double> local_rate(int mode) const;
};

AcceptanceSummary acceptance_summary(const RunRecord& record);

}  // namespace jams
