#include "burnin.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>

#include "error.hpp"
#include "sampler.hpp"
#include "workers.hpp"

namespace jams {

void BurninConfig::validate(int dim) const {
  if (n_starts < 1) throw ConfigError("burnin: n_starts must be >= 1");
  if (box_low.size() != dim || box_high.size() != dim) {
    throw ConfigError("burnin: start box must match the target dimension");
  }
  for (int j = 0; j < dim; ++j) {
    if (!(box_low[j] < box_high[j])) throw ConfigError("burnin: start box must have low < high");
  }
  if (!(merge_q > 0.0)) throw ConfigError("burnin: merge_q must be positive");
  if (!(b_acc >= 1.0)) throw ConfigError("burnin: b_acc must be >= 1");
  if (max_rounds < 1) throw ConfigError("burnin: max_rounds must be >= 1");
  if (round0_len < 1) throw ConfigError("burnin: round0_len must be >= 1");
  adaptation.validate();
  q_kind.validate();
  local_kind.validate();
}

void BurninReport::validate() const {
  if (dim < 1) throw ConfigError("report: dimension must be >= 1");
  modes.validate();
  const size_t n = static_cast<size_t>(modes.count());
  if (modes.dim() != dim) throw ConfigError("report: mode dimension mismatch");
  if (sigma0.size() != n || mode_mean.size() != n || mode_count.size() != n) {
    throw ConfigError("report: per-mode arrays must match the mode count");
  }
  for (size_t i = 0; i < n; ++i) {
    if (sigma0[i].dim() != dim) throw ConfigError("report: sigma0 dimension mismatch");
    if (mode_mean[i].size() != dim) throw ConfigError("report: mode_mean dimension mismatch");
    if (mode_count[i] < 0) throw ConfigError("report: mode_count must be >= 0");
  }
  if (rounds_used < 0 || static_cast<size_t>(rounds_used) != inhomogeneity.size()) {
    throw ConfigError("report: one inhomogeneity row per completed round");
  }
}

std::vector<Vector> sample_starts(const Vector& lo, const Vector& hi, long long n, Rng& rng) {
  if (lo.size() != hi.size()) throw ConfigError("sample_starts: box bounds differ in size");
  std::vector<Vector> out;
  out.reserve(static_cast<size_t>(n));
  for (long long s = 0; s < n; ++s) {
    Vector x(lo.size());
    for (int j = 0; j < lo.size(); ++j) x[j] = rng.uniform(lo[j], hi[j]);
    out.push_back(std::move(x));
  }
  return out;
}

ModeSet merge_modes(const std::vector<OptimizerResult>& candidates, const Target& target,
                    double q) {
  struct Entry {
    Vector mu;
    Matrix hess;
    double log_pi;
  };
  std::vector<Entry> kept;
  for (const OptimizerResult& r : candidates) {
    if (!r.converged || r.hessian.size() == 0) continue;
    if (!std::isfinite(r.f_star)) continue;
    const double log_pi = -r.f_star;

    // Nearest existing mode by the Hessian-averaged squared Mahalanobis
    // distance; merge below q, keeping the higher-density representative.
    int arg = -1;
    double best = std::numeric_limits<double>::infinity();
    for (size_t m = 0; m < kept.size(); ++m) {
      const Vector delta = r.x_star - kept[m].mu;
      const double d2 =
          0.5 * (delta.dot(kept[m].hess * delta) + delta.dot(r.hessian * delta));
      if (d2 < best) {
        best = d2;
        arg = static_cast<int>(m);
      }
    }
    if (arg >= 0 && best < q) {
      if (log_pi > kept[static_cast<size_t>(arg)].log_pi) {
        kept[static_cast<size_t>(arg)] = Entry{r.x_star, r.hessian, log_pi};
      }
    } else {
      kept.push_back(Entry{r.x_star, r.hessian, log_pi});
    }
  }
  if (kept.empty()) {
    throw EmptyCandidates("mode search: no optimisation run passed the convergence filter");
  }
  std::sort(kept.begin(), kept.end(),
            [](const Entry& a, const Entry& b) { return a.log_pi > b.log_pi; });

  ModeSet modes;
  for (Entry& e : kept) {
    modes.mu.push_back(std::move(e.mu));
    modes.hessian.push_back(std::move(e.hess));
    modes.log_pi.push_back(e.log_pi);
  }
  modes.validate();
  if (modes.dim() != target.dim()) throw ConfigError("merge_modes: dimension mismatch");
  return modes;
}

double inhomogeneity_factor(const SpdMatrix& prev, const SpdMatrix& curr) {
  const Vector lam = relative_eigenvalues(prev, curr);
  double inv = 0.0, inv_sqrt = 0.0;
  for (int j = 0; j < lam.size(); ++j) {
    if (!(lam[j] > 0.0)) {
      throw NotPositiveDefinite("inhomogeneity factor: nonpositive relative eigenvalue");
    }
    inv += 1.0 / lam[j];
    inv_sqrt += 1.0 / std::sqrt(lam[j]);
  }
  return static_cast<double>(lam.size()) * inv / (inv_sqrt * inv_sqrt);
}

ModeSet find_modes(const Target& target, const BurninConfig& cfg, std::uint64_t seed, int workers,
                   ModeFindStats* stats) {
  cfg.validate(target.dim());
  Rng start_rng = Rng::derive(seed, {stream::kStarts});
  const std::vector<Vector> starts =
      sample_starts(cfg.box_low, cfg.box_high, cfg.n_starts, start_rng);

  const size_t n = starts.size();
  std::vector<OptimizerResult> results(n);
  std::vector<long long> raw_evals(n, 0);
  parallel_for(n, workers, [&](size_t s) {
    ScalarField f = [&target, &raw_evals, s](const Vector& x) {
      ++raw_evals[s];
      return -target.log_pdf(x);
    };
    GradField g;
    if (target.has_gradient()) {
      g = [&target, &raw_evals, s](const Vector& x) {
        ++raw_evals[s];
        return Vector(-target.grad_log_pdf(x));
      };
    }
    results[s] = bfgs_minimize(f, g, starts[s], cfg.bfgs);
  });

  if (stats) {
    *stats = ModeFindStats{};
    stats->n_starts = static_cast<long long>(n);
    long long sum = 0;
    for (size_t s = 0; s < n; ++s) {
      stats->target_evals += raw_evals[s];
      if (!results[s].converged) continue;
      if (stats->n_converged == 0) {
        stats->evals_min = stats->evals_max = results[s].n_evals;
      } else {
        stats->evals_min = std::min(stats->evals_min, results[s].n_evals);
        stats->evals_max = std::max(stats->evals_max, results[s].n_evals);
      }
      ++stats->n_converged;
      sum += results[s].n_evals;
    }
    if (stats->n_converged > 0) {
      stats->evals_mean = static_cast<double>(sum) / static_cast<double>(stats->n_converged);
    }
  }
  return merge_modes(results, target, cfg.merge_q);
}

BurninReport run_burnin_from_modes(const Target& target, const ModeSet& modes,
                                   const ModeFindStats& find_stats, const BurninConfig& cfg,
                                   std::uint64_t seed, int workers) {
  modes.validate();
  const int d = target.dim();
  cfg.validate(d);
  if (modes.dim() != d) throw ConfigError("burnin: mode dimension mismatch");
  const int n_modes = modes.count();

  // Sigma_{0,i} = H_i^{-1}; chains publish Sigma + beta I from the start.
  std::vector<SpdMatrix> published;
  published.reserve(static_cast<size_t>(n_modes));
  std::vector<Matrix> sigma_tilde0;
  sigma_tilde0.reserve(static_cast<size_t>(n_modes));
  for (int i = 0; i < n_modes; ++i) {
    Matrix inv = spd_inverse(SpdMatrix(modes.hessian[static_cast<size_t>(i)]));
    inv = (0.5 * (inv + inv.transpose())).eval();
    sigma_tilde0.push_back(inv);
    inv.diagonal().array() += cfg.adaptation.beta;
    published.emplace_back(std::move(inv));
  }

  AdaptationConfig adapt = cfg.adaptation;
  if (!std::isfinite(adapt.sigma_eigen_cap)) {
    double lam = 0.0;
    for (const SpdMatrix& s : published) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(s.value(), Eigen::EigenvaluesOnly);
      lam = std::max(lam, es.eigenvalues().maxCoeff());
    }
    adapt.sigma_eigen_cap = 1e6 * lam;
  }

  // One jump-free chain per mode; engines persist across rounds so the
  // adaptation state (n_i, moments, sigma_tilde) keeps accumulating.
  std::vector<std::unique_ptr<ChainEngine>> engines;
  engines.reserve(static_cast<size_t>(n_modes));
  for (int c = 0; c < n_modes; ++c) {
    AugmentedParams params;
    params.sigma = published;
    params.weights = uniform_weights(n_modes);
    params.jump_probs = uniform_jump_probs(n_modes);
    params.q_kind = cfg.q_kind;

    EngineOptions opt;
    opt.epsilon = 0.0;
    opt.jump_kind = JumpKind::deterministic(std::numeric_limits<double>::infinity());
    opt.local_kind = cfg.local_kind;
    opt.adapt = adapt;
    opt.update_weights = false;
    opt.sigma_ref = published;
    opt.pool = PooledResidual(d, adapt.pool_window);

    std::vector<ModeMoments> moments;
    moments.reserve(static_cast<size_t>(n_modes));
    for (int j = 0; j < n_modes; ++j) {
      moments.emplace_back(d, sigma_tilde0[static_cast<size_t>(j)]);
      moments.back().block_len = std::max<long long>(adapt.ac2, 25LL * d);
    }
    ChainState init{modes.mu[static_cast<size_t>(c)], c};
    engines.push_back(std::make_unique<ChainEngine>(target, modes, std::move(params),
                                                    std::move(moments), std::move(init),
                                                    std::move(opt), Rng(0)));
  }

  // b_{k,i} compares the matrix estimated in round k against the round-(k-1)
  // estimate, each built from that round's samples alone (merge-inverted out
  // of the cumulative moments).  Fresh estimates keep the statistic sensitive
  // at its noise floor: consecutive estimates agree within b_acc only once a
  // single round is long enough to pin the covariance, which is what the
  // published matrices inherit.  Round 0 stands in for the Hessian seed.
  std::vector<SpdMatrix> prev_fresh = published;
  struct MomentSnap {
    long long n;
    Vector mean;
    Matrix m2;
  };

  std::vector<Vector> inhomogeneity;
  int rounds_used = 0;
  bool stopped = false;
  long long n_before = 0;  // per-chain iterations completed before the round
  for (int k = 1; k <= cfg.max_rounds && !stopped; ++k) {
    const long long len = cfg.round0_len << (k - 1);
    std::vector<MomentSnap> snap;
    snap.reserve(static_cast<size_t>(n_modes));
    for (int i = 0; i < n_modes; ++i) {
      const ModeMoments& mm = engines[static_cast<size_t>(i)]->moments(i);
      snap.push_back(MomentSnap{mm.n, mm.mean, mm.m2});
    }
    parallel_for(static_cast<size_t>(n_modes), workers, [&](size_t c) {
      engines[c]->set_rng(Rng::derive(
          seed, {stream::kBurninChain, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(k)}));
      engines[c]->run(len);
    });

    Vector b(n_modes);
    std::vector<SpdMatrix> current;
    current.reserve(static_cast<size_t>(n_modes));
    for (int i = 0; i < n_modes; ++i) {
      const size_t si = static_cast<size_t>(i);
      current.push_back(engines[si]->params().sigma[si]);
      const ModeMoments& mm = engines[si]->moments(i);
      const long long nf = mm.n - snap[si].n;
      if (nf >= 2) {
        const double fn = static_cast<double>(nf);
        const Vector mean_f =
            (mm.mean * static_cast<double>(mm.n) - snap[si].mean * static_cast<double>(snap[si].n)) /
            fn;
        const Vector delta = mean_f - snap[si].mean;
        Matrix s = (mm.m2 - snap[si].m2 -
                    delta * delta.transpose() *
                        (static_cast<double>(snap[si].n) * fn / static_cast<double>(mm.n))) /
                   (fn - 1.0);
        s.diagonal().array() += adapt.beta;
        SpdMatrix fresh((0.5 * (s + s.transpose())).eval());
        b[i] = inhomogeneity_factor(prev_fresh[si], fresh);
        prev_fresh[si] = std::move(fresh);
      } else {
        b[i] = 1.0;
      }
    }
    inhomogeneity.push_back(b);
    rounds_used = k;

    // Exchange: every chain adopts every other chain's latest matrix.
    for (int c = 0; c < n_modes; ++c) {
      for (int j = 0; j < n_modes; ++j) {
        if (j != c) engines[static_cast<size_t>(c)]->set_sigma(j, current[static_cast<size_t>(j)]);
      }
    }

    // The stopping rule only consults rounds that ran entirely in the
    // covariance phase (round start at n_i >= ac1).
    const bool eligible = n_before >= adapt.ac1;
    if (eligible && b.maxCoeff() <= cfg.b_acc) stopped = true;
    published = std::move(current);
    n_before += len;
  }

  BurninReport rep;
  rep.target_name = target.name();
  rep.dim = d;
  rep.modes = modes;
  rep.sigma0 = std::move(published);
  rep.rounds_used = rounds_used;
  rep.inhomogeneity = std::move(inhomogeneity);
  rep.round_limit_exceeded = !stopped;
  rep.find_stats = find_stats;
  rep.pooled_residual = engines[0]->pool().e;
  rep.eval_budget = find_stats.target_evals;
  for (int i = 0; i < n_modes; ++i) {
    const ChainEngine& e = *engines[static_cast<size_t>(i)];
    rep.mode_mean.push_back(e.moments(i).mean);
    rep.mode_count.push_back(e.moments(i).n);
    rep.eval_budget += e.n_target_evals();
  }
  rep.validate();
  return rep;
}

BurninReport run_burnin(const Target& target, const BurninConfig& cfg, std::uint64_t seed,
                        int workers) {
  ModeFindStats stats;
  const ModeSet modes = find_modes(target, cfg, seed, workers, &stats);
  return run_burnin_from_modes(target, modes, stats, cfg, seed, workers);
}

}  // namespace jams
