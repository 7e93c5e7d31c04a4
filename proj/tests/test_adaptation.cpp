#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sampler.hpp"

using namespace jams;

TEST_CASE("update_moments: Welford matches the batch formulas") {
  ModeMoments mm(2);
  CHECK(mm.n == 0);
  update_moments(mm, test::vec2(1.0, 2.0));
  CHECK(mm.n == 1);
  CHECK((mm.mean - test::vec2(1.0, 2.0)).norm() == 0.0);
  CHECK(mm.m2.norm() == 0.0);

  update_moments(mm, test::vec2(3.0, -2.0));
  CHECK((mm.mean - test::vec2(2.0, 0.0)).norm() < 1e-15);
  // Two-point covariance: outer product of half the difference, times 2/(n-1).
  Matrix want = test::mat2(2.0, -4.0, -4.0, 8.0);
  CHECK((mm.covariance() - want).norm() < 1e-14);

  // 1000 random points against direct batch computation.
  Rng rng(61);
  const int n = 1000, d = 3;
  Matrix pts(n, d);
  ModeMoments big(d);
  for (int r = 0; r < n; ++r) {
    Vector x = rng.normal_vec(d) * 1.7;
    pts.row(r) = x.transpose();
    update_moments(big, x);
  }
  Vector mean = pts.colwise().mean().transpose();
  Matrix centered = pts.rowwise() - mean.transpose();
  Matrix cov = centered.transpose() * centered / static_cast<double>(n - 1);
  CHECK((big.mean - mean).norm() < 1e-12);
  CHECK((big.covariance() - cov).norm() < 1e-8 * cov.norm());

  ModeMoments fresh(2);
  CHECK_THROWS_AS(fresh.covariance(), Error);
}

TEST_CASE("scaling_update: fixed point at the target rate and frozen factors") {
  AdaptationConfig cfg;  // alpha 0.7, alpha_opt 0.234

  ModeMoments at_target(2);
  at_target.n = 50;
  scaling_update(at_target, std::log(cfg.alpha_opt), cfg);
  CHECK(at_target.sigma_tilde == Matrix::Identity(2, 2));

  ModeMoments mm(2);
  mm.n = 100;
  scaling_update(mm, std::log(0.5), cfg);
  CHECK(mm.sigma_tilde(0, 0) == doctest::Approx(1.0106459195349909).epsilon(1e-14));
  CHECK(mm.sigma_tilde(0, 1) == 0.0);

  // n = 0 is guarded to n = 1; log_alpha 0 gives the largest step e^0.766.
  ModeMoments start(1);
  scaling_update(start, 0.0, cfg);
  CHECK(start.sigma_tilde(0, 0) == doctest::Approx(2.1511444438853180).epsilon(1e-14));

  // Positive log-acceptance values are clamped to 0 first.
  ModeMoments clamped(1);
  scaling_update(clamped, 17.0, cfg);
  CHECK(clamped.sigma_tilde(0, 0) == doctest::Approx(2.1511444438853180).epsilon(1e-14));
}

TEST_CASE("covariance_refresh: ridge floor, consistency, and spectral clamp") {
  AdaptationConfig cfg;
  ModeMoments empty(3);
  SpdMatrix s0 = covariance_refresh(empty, cfg);
  CHECK((s0.value() - cfg.beta * Matrix::Identity(3, 3)).norm() == 0.0);

  // Monte-Carlo check: the refresh recovers the sampling covariance + ridge.
  Rng rng(62);
  ModeMoments mm(2);
  for (int r = 0; r < 100000; ++r) {
    Vector x(2);
    x << rng.normal(), std::sqrt(2.0) * rng.normal();
    update_moments(mm, x);
  }
  Matrix want = test::mat2(1, 0, 0, 2);
  want.diagonal().array() += cfg.beta;
  SpdMatrix s = covariance_refresh(mm, cfg);
  CHECK((s.value() - want).norm() < 0.05 * want.norm());

  // Clamp: eigenvalues forced into [beta, sigma_eigen_cap].
  ModeMoments wide(2);
  update_moments(wide, test::vec2(0, 0));
  update_moments(wide, test::vec2(1, 1));
  Matrix extreme = test::mat2(100.0, 0.0, 0.0, 1e-12);
  wide.set_covariance(extreme);
  AdaptationConfig capped = cfg;
  capped.sigma_eigen_cap = 0.5;
  SpdMatrix clamped = covariance_refresh(wide, capped);
  Eigen::SelfAdjointEigenSolver<Matrix> es(clamped.value());
  CHECK(es.eigenvalues().maxCoeff() <= 0.5 + 1e-12);
  CHECK(es.eigenvalues().minCoeff() >= cfg.beta - 1e-12);
}

TEST_CASE("weight_update: exact values, floor, and guards") {
  // counts (10,20,70), eps_w = 0.01: w_add = 100/97 makes the weights exact
  // decimals 0.107 / 0.204 / 0.689.
  Vector w = weight_update({10, 20, 70}, 0.01);
  CHECK(w[0] == doctest::Approx(0.107).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(0.204).epsilon(1e-15));
  CHECK(w[2] == doctest::Approx(0.689).epsilon(1e-15));

  // A mode never visited sits exactly on the floor eps_w.
  Vector floor_w = weight_update({1000, 0}, 0.005);
  CHECK(floor_w[1] == doctest::Approx(0.005).epsilon(1e-15));

  // No observations yet: uniform.
  Vector uni = weight_update({0, 0, 0, 0}, 0.01);
  for (int i = 0; i < 4; ++i) CHECK(uni[i] == 0.25);

  // Properties over random counts: sums to 1, floor respected, monotone in counts.
  Rng rng(63);
  for (int rep = 0; rep < 50; ++rep) {
    int n_modes = 2 + static_cast<int>(rng.uniform_int_inclusive(6));
    std::vector<long long> counts(n_modes);
    for (auto& c : counts) c = static_cast<long long>(rng.uniform_int_inclusive(5000));
    double eps_w = rng.uniform(1e-4, 0.9 / n_modes);
    Vector ww = weight_update(counts, eps_w);
    CHECK(ww.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ww.minCoeff() >= eps_w - 1e-12);
    for (int i = 0; i < n_modes; ++i)
      for (int j = 0; j < n_modes; ++j)
        if (counts[i] <= counts[j]) CHECK(ww[i] <= ww[j] + 1e-15);
  }

  CHECK_THROWS_AS(weight_update({1, 1}, 0.5), ConfigError);   // eps_w * N = 1
  CHECK_THROWS_AS(weight_update({1, 1}, 0.6), ConfigError);   // eps_w * N > 1
  CHECK_THROWS_AS(weight_update({-1, 5}, 0.01), ConfigError); // negative count
  CHECK_THROWS_AS(weight_update({}, 0.01), ConfigError);      // empty
}

TEST_CASE("AirSchedule: per-step gaps obey the deterministic and jitter bounds") {
  AdaptationConfig cfg;
  cfg.air_enabled = true;
  cfg.air_c = 100.0;
  cfg.air_kappa = 1.0;
  cfg.air_kappa_star = 0.5;
  AirSchedule sched(cfg, Rng(64));
  long long prev = 0;
  for (long long j = 1; j <= 10000; ++j) {
    long long t = sched.next();
    long long gap = t - prev;
    long long n_j = static_cast<long long>(std::ceil(100.0 * static_cast<double>(j)));
    long long jitter_cap = static_cast<long long>(std::floor(std::sqrt(static_cast<double>(j))));
    CHECK(gap >= n_j);
    CHECK(gap <= n_j + jitter_cap);
    prev = t;
  }

  // Update times are increasingly rare: at most ~sqrt(T/50) of them below T.
  AirSchedule sched2(cfg, Rng(65));
  int count = 0;
  while (sched2.next() <= 100000) ++count;
  CHECK(count <= 50);
  CHECK(count >= 40);
}

TEST_CASE("compact regions: shared radius formula and closed-ball membership") {
  ModeSet modes;
  modes.mu = {test::vec2(0, 0), test::vec2(3, 0)};
  modes.hessian = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  modes.log_pi = {0.0, 0.0};
  std::vector<SpdMatrix> sigma0 = {SpdMatrix(Matrix::Identity(2, 2)),
                                   SpdMatrix(2.0 * Matrix::Identity(2, 2))};
  CompactRegions regions = make_compact_regions(modes, sigma0);
  REQUIRE(regions.centers.size() == 2);
  REQUIRE(regions.radius.size() == 2);
  // 2 * diameter + 100 sqrt(d * lambda_max) = 6 + 100 sqrt(4) = 206.
  CHECK(regions.radius[0] == doctest::Approx(206.0).epsilon(1e-12));
  CHECK(regions.radius[1] == doctest::Approx(206.0).epsilon(1e-12));
  CHECK((regions.centers[0] - modes.mu[0]).norm() == 0.0);
  CHECK((regions.centers[1] - modes.mu[1]).norm() == 0.0);

  CHECK(in_compact_set(regions, test::vec2(0, 0), 0));
  CHECK(in_compact_set(regions, test::vec2(206, 0), 0));   // boundary is inside
  CHECK(!in_compact_set(regions, test::vec2(206.001, 0), 0));
  CHECK(in_compact_set(regions, test::vec2(3 + 206, 0), 1));
  CHECK(!in_compact_set(regions, test::vec2(-204, 0), 1));
}

namespace {

// Single-mode engine on the d=1 mixture; epsilon = 0 means every move is local.
struct EngineHarness {
  TargetPtr target = gaussian_mixture_target(1);
  ModeSet modes;
  AugmentedParams params;
  std::vector<ModeMoments> moments;

  EngineHarness() {
    modes.mu = {Vector::Constant(1, -1.0)};
    modes.hessian = {Matrix::Constant(1, 1, 20.0)};
    modes.log_pi = {0.0};
    params.sigma = {SpdMatrix(Matrix::Constant(1, 1, 0.05))};
    params.weights = uniform_weights(1);
    params.jump_probs = uniform_jump_probs(1);
    params.q_kind = EllipticalKind::normal();
    moments.emplace_back(1);
  }
};

}  // namespace

TEST_CASE("ChainEngine: scaling then cadenced covariance refreshes") {
  EngineHarness h;
  EngineOptions opt;
  opt.epsilon = 0.0;
  opt.update_weights = false;
  opt.adapt.ac1 = 500;
  opt.adapt.ac2 = 250;
  ChainEngine engine(*h.target, h.modes, h.params, h.moments, ChainState{h.modes.mu[0], 0}, opt,
                     Rng(66));
  engine.run(100000);
  CHECK(engine.iterations() == 100000);
  CHECK(engine.moments(0).n == 100000);
  // Scaling happens at n = 1..499; refreshes at every multiple of 250 from 500 on.
  CHECK(engine.scaling_updates() == 499);
  CHECK(engine.covariance_refreshes() == 399);
  CHECK(engine.gated_skips() == 0);
}

TEST_CASE("ChainEngine: compact gate blocks adaptation but the schedule advances") {
  EngineHarness h;
  EngineOptions opt;
  opt.epsilon = 0.0;
  opt.update_weights = false;
  opt.air_mode = true;
  opt.adapt.air_enabled = true;
  opt.adapt.air_c = 10.0;
  opt.adapt.air_kappa = 1.0;
  opt.adapt.air_kappa_star = 0.5;

  // Region nowhere near the chain: every iteration is gated.
  opt.regions.centers = {Vector::Constant(1, 1e6)};
  opt.regions.radius = {0.5};
  ChainEngine gated(*h.target, h.modes, h.params, h.moments, ChainState{h.modes.mu[0], 0}, opt,
                    Rng(67));
  gated.run(500);
  CHECK(gated.gated_skips() == 500);
  CHECK(gated.moments(0).n == 0);
  CHECK(gated.scaling_updates() == 0);
  CHECK(gated.covariance_refreshes() == 0);

  // Huge region: nothing is gated, parameter updates happen only at the rare
  // schedule times.
  opt.regions.centers = {h.modes.mu[0]};
  opt.regions.radius = {1e9};
  ChainEngine open(*h.target, h.modes, h.params, h.moments, ChainState{h.modes.mu[0], 0}, opt,
                   Rng(67));
  open.run(1000);
  CHECK(open.gated_skips() == 0);
  CHECK(open.moments(0).n == 1000);
  CHECK(open.param_updates() >= 1);
  CHECK(open.param_updates() <= 15);  // sum of 10k+jitter exceeds 1000 near k = 13
}
