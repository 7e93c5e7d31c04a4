#include <cmath>

#include "config.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace jams;

namespace {

// Hand-built burn-in handover for the d=1 mixture: exact component means and
// variances, counts past ac1 so the run starts in the covariance phase.
BurninReport two_mode_1d_report() {
  BurninReport rep;
  rep.target_name = "gaussian_mixture";
  rep.dim = 1;
  rep.modes.mu = {Vector::Constant(1, -1.0), Vector::Constant(1, 1.0)};
  rep.modes.hessian = {Matrix::Constant(1, 1, 20.0), Matrix::Constant(1, 1, 10.0)};
  rep.modes.log_pi = {std::log(0.5 / std::sqrt(2.0 * M_PI * 0.05)),
                      std::log(0.5 / std::sqrt(2.0 * M_PI * 0.1))};
  rep.sigma0 = {SpdMatrix(Matrix::Constant(1, 1, 0.05)), SpdMatrix(Matrix::Constant(1, 1, 0.1))};
  rep.mode_mean = rep.modes.mu;
  rep.mode_count = {2000, 2000};
  rep.validate();
  return rep;
}

RunConfig quick_config(long long iters, std::uint64_t seed) {
  RunConfig cfg;
  cfg.n_iters = iters;
  cfg.seed = seed;
  cfg.adaptation.local_scale = 2.38 * 2.38;  // d = 1
  return cfg;
}

}  // namespace

TEST_CASE("RunConfig::validate rejects out-of-range settings") {
  RunConfig ok = quick_config(100, 1);
  ok.validate();

  RunConfig bad = ok;
  bad.epsilon = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.epsilon = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.n_iters = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.record_stride = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.discard = 100;  // must stay below n_iters
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ok;
  bad.snapshot_stride = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("run_chain: epsilon 0 never jumps") {
  TargetPtr t = gaussian_mixture_target(1);
  BurninReport rep = two_mode_1d_report();
  RunConfig cfg = quick_config(5000, 2);
  cfg.epsilon = 0.0;
  RunRecord rec = run_chain(*t, rep, cfg);
  CHECK(rec.jump_attempts.sum() == 0.0);
  CHECK(rec.local_attempts[0] + rec.local_attempts[1] == 5000);
  // The chain starts at the dominant mode and can never leave it.
  CHECK(rec.local_attempts[0] == 5000);
  CHECK(rec.occupancy[0] == 5000);
  CHECK(rec.occupancy[1] == 0);
  for (const auto& row : rec.samples) CHECK(row.mode == 0);
}

TEST_CASE("run_chain: single-mode report runs and estimates the target mean") {
  TargetPtr t = make_target(1, "gauss", [](const Vector& x) {
    return -(x[0] + 1.0) * (x[0] + 1.0) / 0.1;  // N(-1, 0.05)
  });
  BurninReport rep;
  rep.target_name = "gauss";
  rep.dim = 1;
  rep.modes.mu = {Vector::Constant(1, -1.0)};
  rep.modes.hessian = {Matrix::Constant(1, 1, 20.0)};
  rep.modes.log_pi = {0.0};
  rep.sigma0 = {SpdMatrix(Matrix::Constant(1, 1, 0.05))};
  rep.mode_mean = rep.modes.mu;
  rep.mode_count = {2000};
  rep.validate();

  RunConfig cfg = quick_config(20000, 3);
  RunRecord rec = run_chain(*t, rep, cfg);
  // With one mode every iteration is local (jump attempts convert).
  CHECK(rec.jump_attempts.sum() == 0.0);
  CHECK(rec.local_attempts[0] == 20000);
  CHECK(rec.n_recorded == 20000);
  CHECK(std::abs(estimate_mean(rec)[0] + 1.0) < 0.1);
  CHECK(rec.final_weights.size() == 1);
  CHECK(rec.final_weights[0] == 1.0);
}

TEST_CASE("run_chain: record stride and discard boundaries") {
  TargetPtr t = gaussian_mixture_target(1);
  BurninReport rep = two_mode_1d_report();
  RunConfig cfg = quick_config(10, 4);
  cfg.discard = 3;
  cfg.record_stride = 2;
  RunRecord rec = run_chain(*t, rep, cfg);
  CHECK(rec.n_iters == 10);
  REQUIRE(rec.n_recorded == 4);
  REQUIRE(rec.samples.size() == 4);
  long long want_iters[4] = {4, 6, 8, 10};
  for (int s = 0; s < 4; ++s) {
    CHECK(rec.samples[s].iter == want_iters[s]);
    CHECK((rec.samples[s].mode == 0 || rec.samples[s].mode == 1));
  }
  // Occupancy and mean are computed over the recorded rows only.
  CHECK(rec.occupancy[0] + rec.occupancy[1] == 4);
  Vector manual = Vector::Zero(1);
  for (const auto& row : rec.samples) manual += row.x;
  manual /= 4.0;
  CHECK((estimate_mean(rec) - manual).norm() < 1e-15);
}

TEST_CASE("run_chain: sink sees every recorded row") {
  TargetPtr t = gaussian_mixture_target(1);
  BurninReport rep = two_mode_1d_report();
  RunConfig cfg = quick_config(50, 5);
  cfg.record_stride = 5;
  long long calls = 0;
  Vector sum = Vector::Zero(1);
  RunRecord rec = run_chain(*t, rep, cfg, [&](const SampleRow& row) {
    ++calls;
    sum += row.x;
  });
  CHECK(calls == rec.n_recorded);
  CHECK(calls == 10);
  CHECK((sum / 10.0 - estimate_mean(rec)).norm() < 1e-15);
}

TEST_CASE("run_chain: weight snapshots at the requested cadence") {
  TargetPtr t = gaussian_mixture_target(1);
  BurninReport rep = two_mode_1d_report();
  RunConfig cfg = quick_config(10, 6);
  cfg.snapshot_stride = 3;
  RunRecord rec = run_chain(*t, rep, cfg);
  REQUIRE(rec.weight_snapshots.size() == 3);
  long long want[3] = {3, 6, 9};
  for (int s = 0; s < 3; ++s) {
    CHECK(rec.weight_snapshots[s].first == want[s]);
    CHECK(rec.weight_snapshots[s].second.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("run_chain: deterministic in the seed") {
  TargetPtr t = gaussian_mixture_target(1);
  BurninReport rep = two_mode_1d_report();
  for (bool air : {false, true}) {
    RunConfig cfg = quick_config(3000, 7);
    cfg.air_mode = air;
    RunRecord a = run_chain(*t, rep, cfg);
    RunRecord b = run_chain(*t, rep, cfg);
    CHECK(a.n_recorded == b.n_recorded);
    CHECK((a.mean - b.mean).norm() == 0.0);
    CHECK((a.final_weights - b.final_weights).norm() == 0.0);
    CHECK((a.jump_attempts - b.jump_attempts).norm() == 0.0);
    CHECK((a.jump_accepts - b.jump_accepts).norm() == 0.0);
    CHECK(a.n_target_evals == b.n_target_evals);
    REQUIRE(a.samples.size() == b.samples.size());
    for (size_t s = 0; s < a.samples.size(); s += 97) {
      CHECK(a.samples[s].x == b.samples[s].x);
      CHECK(a.samples[s].mode == b.samples[s].mode);
    }
    cfg.seed = 8;
    RunRecord c = run_chain(*t, rep, cfg);
    CHECK((a.mean - c.mean).norm() > 0.0);
  }
}

TEST_CASE("run_chain: AIR safeguards leave a well-behaved chain untouched") {
  TargetPtr t = gaussian_mixture_target(1);
  BurninReport rep = two_mode_1d_report();
  RunConfig cfg = quick_config(20000, 9);
  cfg.air_mode = true;
  RunRecord rec = run_chain(*t, rep, cfg);
  // Compact regions are enormous relative to the chain's excursions.
  CHECK(rec.gated_skips == 0);
  // Updates only at the AIR times: sum of 100k+jitter stays below 2e4 for
  // k <= 19, against ~40 cadence refreshes in plain mode.
  CHECK(rec.covariance_refreshes + rec.scaling_updates >= 1);
  CHECK(rec.covariance_refreshes + rec.scaling_updates <= 20);

  RunConfig plain = quick_config(20000, 9);
  plain.adaptation.ac2 = 500;  // ~40 cadence refreshes, clearly above the AIR count
  RunRecord base = run_chain(*t, rep, plain);
  CHECK(base.covariance_refreshes > rec.covariance_refreshes);
  // Both estimate the mixture mean E[x] = 0 decently.
  CHECK(std::abs(estimate_mean(rec)[0]) < 0.25);
  CHECK(std::abs(estimate_mean(base)[0]) < 0.25);
}

TEST_CASE("estimate_mean and rmse semantics") {
  RunRecord rec;
  rec.n_recorded = 0;
  CHECK_THROWS_AS(estimate_mean(rec), ConfigError);

  rec.n_recorded = 5;
  rec.mean = test::vec2(0.3, -0.4);
  CHECK(rmse(rec, test::vec2(0.3, -0.4)) == 0.0);
  // Plain Euclidean distance of the mean from the truth.
  CHECK(rmse(rec, test::vec2(0.0, 0.0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(rmse(rec, Vector::Zero(3)), ConfigError);

  // CLT scale: the mean of 1e5 standard normal vectors in d=10 sits well
  // within rmse/sqrt(d) = 0.02 of the origin.
  Rng rng(91);
  RunRecord clt;
  clt.n_recorded = 100000;
  Vector acc = Vector::Zero(10);
  for (int s = 0; s < 100000; ++s) acc += rng.normal_vec(10);
  clt.mean = acc / 100000.0;
  CHECK(rmse(clt, Vector::Zero(10)) / std::sqrt(10.0) < 0.02);
}

TEST_CASE("acceptance_summary: rates are absent until attempted") {
  RunRecord rec;
  rec.jump_attempts = Matrix::Zero(2, 2);
  rec.jump_accepts = Matrix::Zero(2, 2);
  rec.local_attempts = {0, 3};
  rec.local_accepts = {0, 2};
  AcceptanceSummary s = acceptance_summary(rec);
  CHECK(!s.jump_rate(0, 1).has_value());
  CHECK(!s.jump_rate_from(0).has_value());
  CHECK(!s.jump_rate_overall().has_value());
  CHECK(!s.local_rate(0).has_value());
  REQUIRE(s.local_rate(1).has_value());
  CHECK(*s.local_rate(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  rec.jump_attempts(0, 1) = 4;
  rec.jump_accepts(0, 1) = 3;
  s = acceptance_summary(rec);
  CHECK(*s.jump_rate(0, 1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(*s.jump_rate_from(0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(*s.jump_rate_overall() == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(!s.jump_rate(1, 0).has_value());
}

TEST_CASE("run_chain: full defaults on the d=10 mixture hit the published rates") {
  ExperimentSpec spec = ExperimentSpec::defaults("gaussian_mixture", 10);
  TargetPtr t = spec.load_target();
  BurninConfig bcfg = spec.burnin;
  bcfg.n_starts = 300;  // plenty for two modes
  BurninReport report = run_burnin(*t, bcfg, 101, 1);
  REQUIRE(report.modes.count() == 2);

  RunConfig cfg = spec.run;
  cfg.jump_kind = spec.resolve_jump("deterministic");
  cfg.seed = 102;
  cfg.n_iters = 500000;
  cfg.store_samples = false;
  RunRecord rec = run_chain(*t, report, cfg, nullptr);

  // Equal component weights: occupancy balances to 0.5 +- 0.02.
  double occ0 = static_cast<double>(rec.occupancy[0]) / static_cast<double>(rec.n_recorded);
  CHECK(occ0 > 0.48);
  CHECK(occ0 < 0.52);

  AcceptanceSummary s = acceptance_summary(rec);
  REQUIRE(s.jump_rate_overall().has_value());
  CHECK(*s.jump_rate_overall() > 0.93);

  // Local acceptance near the 0.234 optimum.
  long long att = 0, acc = 0;
  for (int i = 0; i < 2; ++i) {
    att += rec.local_attempts[i];
    acc += rec.local_accepts[i];
  }
  double local_rate = static_cast<double>(acc) / static_cast<double>(att);
  CHECK(local_rate > 0.18);
  CHECK(local_rate < 0.30);

  // The estimated mean recovers E[x] = 0 to rmse/sqrt(d) < 0.05.
  CHECK(rmse(rec, *t->true_mean()) / std::sqrt(10.0) < 0.05);

  // Weights converge near 1/2 each.
  CHECK(rec.final_weights[0] == doctest::Approx(0.5).epsilon(0.1));
  CHECK(rec.final_weights.sum() == doctest::Approx(1.0).epsilon(1e-9));
}
