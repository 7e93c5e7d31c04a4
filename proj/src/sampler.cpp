#include "sampler.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <utility>

#include "error.hpp"

namespace jams {

ChainEngine::ChainEngine(const Target& target, const ModeSet& modes, AugmentedParams params,
                         std::vector<ModeMoments> moments, ChainState init, EngineOptions opt,
                         Rng rng)
    : target_(target),
      modes_(modes),
      params_(std::move(params)),
      opt_(std::move(opt)),
      ctx_(target_, modes_, params_),
      moments_(std::move(moments)),
      obs_counts_(static_cast<size_t>(modes.count()), 0),
      state_(std::move(init)),
      pool_(opt_.pool),
      rng_(std::move(rng)) {
  const int n = modes_.count();
  const int d = modes_.dim();
  modes_.validate();
  params_.validate(d);
  opt_.adapt.validate();
  if (params_.count() != n || static_cast<int>(moments_.size()) != n) {
    throw ConfigError("engine: params/moments size must match the mode count");
  }
  if (state_.i < 0 || state_.i >= n || state_.x.size() != d) {
    throw ConfigError("engine: initial state out of range");
  }
  if (!(opt_.epsilon >= 0.0 && opt_.epsilon < 1.0)) {
    throw ConfigError("engine: epsilon must lie in [0, 1)");
  }
  if (opt_.air_mode && (static_cast<int>(opt_.regions.centers.size()) != n ||
                        static_cast<int>(opt_.regions.radius.size()) != n)) {
    throw ConfigError("engine: air mode requires one compact region per mode");
  }
  if (!opt_.sigma_ref.empty() && static_cast<int>(opt_.sigma_ref.size()) != n) {
    throw ConfigError("engine: sigma_ref must hold one anchor per mode");
  }
  if (pool_.window > 0.0) {
    if (opt_.sigma_ref.empty()) throw ConfigError("engine: the pooled residual needs anchors");
    if (pool_.e.size() == 0) pool_.e = Matrix::Zero(d, d);
    if (pool_.e.rows() != d || pool_.e.cols() != d) {
      throw ConfigError("engine: pooled-residual state has the wrong dimension");
    }
  }
  ctx_.local_kind = opt_.local_kind;
  eps_w_ = opt_.adapt.eps_w_tilde / n;
  if (opt_.air_mode) {
    air_.emplace(opt_.adapt, Rng(opt_.air_stream_seed));
    next_air_ = air_->next();
  }
}

void ChainEngine::run(long long n) {
  for (long long t = 0; t < n; ++t) step();
}

MoveOutcome ChainEngine::step() {
  ++n_total_;
  // The local proposal uses the raw published Sigma during the scaling phase
  // and the 2.38^2/d-scaled one afterwards.
  ctx_.local_scale = moments_[state_.i].n < opt_.adapt.ac1 ? 1.0 : opt_.adapt.local_scale;

  const double u = rng_.u01();
  MoveOutcome out = u > opt_.epsilon ? local_step(ctx_, state_, rng_, &cur_)
                                     : jump_step(ctx_, state_, opt_.jump_kind, rng_, &cur_);
  state_ = out.next;

  const int im = state_.i;
  if (opt_.update_weights) ++obs_counts_[im];

  // Moment and parameter updates run unconditionally in plain mode; with the
  // compact-set gate they are skipped outside A_im, and parameter updates
  // additionally fire only at the scheduled update times (which advance
  // whether or not the gate lets the update happen).
  const bool air_due = opt_.air_mode && n_total_ == next_air_;
  if (air_due) next_air_ = air_->next();
  if (!opt_.air_mode || in_compact_set(opt_.regions, state_.x, im)) {
    update_moments(moments_[im], state_.x);
    if (!opt_.air_mode || air_due) apply_param_update(out, im);
  } else {
    ++n_gated_skips_;
  }
  return out;
}

void ChainEngine::apply_param_update(const MoveOutcome& out, int im) {
  ModeMoments& mm = moments_[im];
  if (mm.n < opt_.adapt.ac1) {
    if (out.move_type == MoveType::kLocal) {
      scaling_update(mm, out.log_alpha, opt_.adapt);
      Matrix pub = mm.sigma_tilde;
      pub.diagonal().array() += opt_.adapt.beta;
      params_.sigma[im] = SpdMatrix(std::move(pub));
      cur_.invalidate_q();
      ++n_scaling_updates_;
      ++n_param_updates_;
    }
  } else if (opt_.air_mode || mm.n % opt_.adapt.ac2 == 0) {
    refresh_sigma(im);
  }
}

void ChainEngine::refresh_sigma(int im) {
  ModeMoments& mm = moments_[static_cast<size_t>(im)];
  if (opt_.sigma_ref.empty()) {
    params_.sigma[im] = covariance_refresh(mm, opt_.adapt);
  } else {
    const SpdMatrix& anchor = opt_.sigma_ref[static_cast<size_t>(im)];
    if (pool_.enabled()) {
      if (mm.n_c >= 2) {
        pool_.ingest(mm.block_covariance(), mm.n_c, anchor, shrink_intensity(mm, anchor));
      }
      mm.reset_block();
    }
    if (pool_.enabled() && opt_.pool_compose) {
      // The pool moved, so every published matrix past its scaling phase is
      // recomposed; that keeps the deformation common across modes.
      for (int j = 0; j < params_.count(); ++j) {
        const ModeMoments& mj = moments_[static_cast<size_t>(j)];
        if (j != im && mj.n < opt_.adapt.ac1) continue;
        params_.sigma[static_cast<size_t>(j)] =
            covariance_refresh(mj, opt_.sigma_ref[static_cast<size_t>(j)], pool_, opt_.adapt);
      }
    } else {
      params_.sigma[im] = covariance_refresh(mm, anchor, opt_.adapt);
    }
  }
  if (opt_.update_weights) {
    params_.weights = weight_update(obs_counts_, eps_w_);
    ctx_.refresh_weights();
  }
  cur_.invalidate_q();
  ++n_refreshes_;
  ++n_param_updates_;
}

void ChainEngine::set_sigma(int i, SpdMatrix s) {
  if (i < 0 || i >= params_.count()) throw ConfigError("set_sigma: mode index out of range");
  params_.sigma[static_cast<size_t>(i)] = std::move(s);
  cur_.invalidate_q();
}

void RunConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in [0, 1)");
  if (n_iters <= 0) throw ConfigError("n_iters must be positive");
  if (record_stride <= 0) throw ConfigError("record_stride must be positive");
  if (discard < 0 || discard >= n_iters) throw ConfigError("discard must lie in [0, n_iters)");
  if (snapshot_stride < 0) throw ConfigError("snapshot_stride must be >= 0");
  q_kind.validate();
  local_kind.validate();
  adaptation.validate();
}

namespace {

double max_sigma_eigenvalue(const std::vector<SpdMatrix>& sigma) {
  double lam = 0.0;
  for (const SpdMatrix& s : sigma) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s.value(), Eigen::EigenvaluesOnly);
    lam = std::max(lam, es.eigenvalues().maxCoeff());
  }
  return lam;
}

}  // namespace

RunRecord run_chain(const Target& target, const BurninReport& report, const RunConfig& cfg,
                    const SampleSink& sink) {
  cfg.validate();
  report.validate();
  const int d = report.dim;
  const int n_modes = report.modes.count();
  if (target.dim() != d) throw ConfigError("run_chain: target dimension does not match report");

  AugmentedParams params;
  params.sigma = report.sigma0;
  params.weights = uniform_weights(n_modes);
  params.jump_probs = uniform_jump_probs(n_modes);
  params.q_kind = cfg.q_kind;

  EngineOptions opt;
  opt.epsilon = cfg.epsilon;
  opt.jump_kind = cfg.jump_kind;
  opt.local_kind = cfg.local_kind;
  opt.adapt = cfg.adaptation;
  if (!std::isfinite(opt.adapt.sigma_eigen_cap)) {
    opt.adapt.sigma_eigen_cap = 1e6 * max_sigma_eigenvalue(report.sigma0);
  }
  opt.update_weights = true;
  opt.air_mode = cfg.air_mode;
  if (cfg.air_mode) {
    opt.adapt.air_enabled = true;
    opt.regions = make_compact_regions(report.modes, report.sigma0);
    opt.air_stream_seed = Rng::derive(cfg.seed, {stream::kAir}).next_u64();
  }
  opt.sigma_ref = report.sigma0;
  if (cfg.adaptation.pool_window > 0.0) {
    opt.pool = PooledResidual(d, cfg.adaptation.pool_window);
    if (report.pooled_residual.rows() == d && report.pooled_residual.cols() == d) {
      opt.pool.e = report.pooled_residual;
    }
    opt.pool_compose = true;
  }

  // Adaptation state continues from burn-in: S_i = sigma_tilde_i = Sigma_{K,i}.
  std::vector<ModeMoments> moments;
  moments.reserve(static_cast<size_t>(n_modes));
  for (int i = 0; i < n_modes; ++i) {
    ModeMoments mm(d, report.sigma0[static_cast<size_t>(i)].value());
    mm.block_len = std::max<long long>(opt.adapt.ac2, 25LL * d);
    mm.n = report.mode_count[static_cast<size_t>(i)];
    mm.mean = report.mode_mean[static_cast<size_t>(i)];
    mm.set_covariance(report.sigma0[static_cast<size_t>(i)].value());
    moments.push_back(std::move(mm));
  }

  ChainState init{report.modes.mu[0], 0};
  ChainEngine engine(target, report.modes, std::move(params), std::move(moments), std::move(init),
                     std::move(opt), Rng::derive(cfg.seed, {stream::kMainChain}));

  RunRecord rec;
  rec.jump_attempts = Matrix::Zero(n_modes, n_modes);
  rec.jump_accepts = Matrix::Zero(n_modes, n_modes);
  rec.local_attempts.assign(static_cast<size_t>(n_modes), 0);
  rec.local_accepts.assign(static_cast<size_t>(n_modes), 0);
  rec.occupancy.assign(static_cast<size_t>(n_modes), 0);
  rec.mean = Vector::Zero(d);
  rec.n_iters = cfg.n_iters;

  long long expected_records = 0;
  if (cfg.n_iters > cfg.discard) {
    expected_records = (cfg.n_iters - cfg.discard - 1) / cfg.record_stride + 1;
  }
  const bool store = cfg.store_samples && expected_records * d <= 10'000'000;
  if (store) rec.samples.reserve(static_cast<size_t>(expected_records));

  const auto t0 = std::chrono::steady_clock::now();
  for (long long n = 1; n <= cfg.n_iters; ++n) {
    const int from = engine.state().i;
    MoveOutcome out;
    try {
      out = engine.step();
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " (iteration " + std::to_string(n) +
                                ", mode " + std::to_string(from + 1) + ")");
    }

    if (out.move_type == MoveType::kJump) {
      rec.jump_attempts(from, out.proposed_mode) += 1.0;
      if (out.accepted) rec.jump_accepts(from, out.proposed_mode) += 1.0;
    } else {
      ++rec.local_attempts[static_cast<size_t>(from)];
      if (out.accepted) ++rec.local_accepts[static_cast<size_t>(from)];
    }

    if (n > cfg.discard && (n - cfg.discard - 1) % cfg.record_stride == 0) {
      ++rec.n_recorded;
      ++rec.occupancy[static_cast<size_t>(out.next.i)];
      rec.mean += (out.next.x - rec.mean) / static_cast<double>(rec.n_recorded);
      SampleRow row{n, out.next.i, out.move_type, out.accepted, out.next.x};
      if (sink) sink(row);
      if (store) rec.samples.push_back(std::move(row));
    }

    if (cfg.snapshot_stride > 0 && n % cfg.snapshot_stride == 0) {
      rec.weight_snapshots.emplace_back(n, engine.params().weights);
    }
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  rec.n_target_evals = engine.n_target_evals();
  rec.final_weights = engine.params().weights;
  rec.scaling_updates = engine.scaling_updates();
  rec.covariance_refreshes = engine.covariance_refreshes();
  rec.gated_skips = engine.gated_skips();
  return rec;
}

Vector estimate_mean(const RunRecord& record) {
  if (record.n_recorded <= 0) throw ConfigError("estimate_mean: no recorded samples");
  return record.mean;
}

double rmse(const RunRecord& record, const Vector& truth) {
  const Vector m = estimate_mean(record);
  if (m.size() != truth.size()) throw ConfigError("rmse: dimension mismatch");
  return (m - truth).norm();
}

std::optional<double> AcceptanceSummary::jump_rate(int from, int to) const {
  const double a = jump_attempts(from, to);
  if (a <= 0.0) return std::nullopt;
  return jump_accepts(from, to) / a;
}

std::optional<double> AcceptanceSummary::jump_rate_from(int from) const {
  const double a = jump_attempts.row(from).sum();
  if (a <= 0.0) return std::nullopt;
  return jump_accepts.row(from).sum() / a;
}

std::optional<double> AcceptanceSummary::jump_rate_overall() const {
  const double a = jump_attempts.sum();
  if (a <= 0.0) return std::nullopt;
  return jump_accepts.sum() / a;
}

std::optional<double> AcceptanceSummary::local_rate(int mode) const {
  const long long a = local_attempts[static_cast<size_t>(mode)];
  if (a <= 0) return std::nullopt;
  return static_cast<double>(local_accepts[static_cast<size_t>(mode)]) / static_cast<double>(a);
}

AcceptanceSummary acceptance_summary(const RunRecord& record) {
  return AcceptanceSummary{record.jump_attempts, record.jump_accepts, record.local_attempts,
                           record.local_accepts};
}

}  // namespace jams
