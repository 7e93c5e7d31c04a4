#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sensor.hpp"
#include "targets.hpp"

using namespace jams;

namespace {

// Relative agreement between analytic and finite-difference gradients.
void check_gradient(const Target& t, const Vector& x) {
  Vector g = t.grad_log_pdf(x);
  Vector fd = fd_gradient([&](const Vector& p) { return t.log_pdf(p); }, x);
  CHECK((g - fd).norm() <= 1e-4 * std::max(1.0, g.norm()));
}

}  // namespace

TEST_CASE("gaussian mixture: component variances at d=100") {
  TargetPtr t = gaussian_mixture_target(100);
  // At -1 the first component dominates: var 0.5 makes 2 pi var = pi.
  double at_m1 = t->log_pdf(Vector::Constant(100, -1.0));
  CHECK(at_m1 == doctest::Approx(std::log(0.5) - 50.0 * std::log(M_PI)).epsilon(1e-12));
  // At +1 the second component (var 1) dominates.
  double at_p1 = t->log_pdf(Vector::Constant(100, 1.0));
  CHECK(at_p1 == doctest::Approx(std::log(0.5) - 50.0 * std::log(2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("gaussian mixture: equal-variance symmetry in d=1") {
  TargetPtr t = gaussian_mixture_target(1, 0.07, 0.07);
  Rng rng(21);
  for (int i = 0; i < 50; ++i) {
    Vector x(1);
    x[0] = rng.uniform(-4.0, 4.0);
    CHECK(t->log_pdf(x) == doctest::Approx(t->log_pdf(-x)).epsilon(1e-12));
  }
}

TEST_CASE("gaussian mixture: frozen value at (-1,-1), d=2") {
  TargetPtr t = gaussian_mixture_target(2);
  CHECK(t->log_pdf(Vector::Constant(2, -1.0)) ==
        doctest::Approx(0.11813443630498772).epsilon(1e-13));
}

TEST_CASE("gaussian mixture: integrates to 1 in d=1") {
  TargetPtr t = gaussian_mixture_target(1);
  const double lo = -6.0, hi = 6.0;
  const int n = 100000;  // Simpson rule, even interval count
  const double h = (hi - lo) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    Vector x(1);
    x[0] = lo + i * h;
    double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    sum += w * std::exp(t->log_pdf(x));
  }
  CHECK(sum * h / 3.0 == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("gaussian mixture: analytic gradient and true mean") {
  TargetPtr t = gaussian_mixture_target(3);
  REQUIRE(t->has_gradient());
  Rng rng(22);
  for (int i = 0; i < 100; ++i) check_gradient(*t, rng.normal_vec(3) * 1.5);
  CHECK(t->true_mean()->isZero(1e-15));
}

TEST_CASE("banana/t mixture: frozen values at centres and off-centre") {
  TargetPtr t = banana_t_mixture_target(10);
  auto centers = banana_t_mixture_centers(10);
  CHECK(t->log_pdf(centers[0]) == doctest::Approx(11.797636116937115).epsilon(1e-12));
  CHECK(t->log_pdf(centers[7]) == doctest::Approx(7.1687494043317089).epsilon(1e-12));
  Vector x(10);
  x << 1.1, 2.3, 0.7, 5.0, 4.1, 3.3, 6.5, 0.2, 7.7, 2.9;
  CHECK(t->log_pdf(x) == doctest::Approx(-39.078614417661123).epsilon(1e-12));
}

TEST_CASE("banana/t mixture: centre tiling and dimension guard") {
  auto centers = banana_t_mixture_centers(12);
  CHECK(centers.size() == 20);
  CHECK(centers[1][0] == doctest::Approx(8.67));
  CHECK(centers[1][3] == doctest::Approx(9.59));
  CHECK(centers[19][10] == doctest::Approx(1.69));
  CHECK_THROWS_AS(banana_t_mixture_target(9), ConfigError);
}

TEST_CASE("banana/t mixture: every centre is a strict local maximum") {
  TargetPtr t = banana_t_mixture_target(10);
  for (const Vector& c : banana_t_mixture_centers(10)) {
    double here = t->log_pdf(c);
    for (int m = 0; m < 10; ++m) {
      Vector probe = c;
      probe[m] += 1e-3;
      CHECK(t->log_pdf(probe) < here);
      probe[m] = c[m] - 1e-3;
      CHECK(t->log_pdf(probe) < here);
    }
  }
}

TEST_CASE("banana/t mixture: analytic gradient matches finite differences") {
  TargetPtr t = banana_t_mixture_target(10);
  REQUIRE(t->has_gradient());
  Rng rng(23);
  for (int i = 0; i < 100; ++i) {
    Vector x(10);
    for (int m = 0; m < 10; ++m) x[m] = rng.uniform(0.0, 10.0);
    check_gradient(*t, x);
  }
}

TEST_CASE("banana/t mixture: true mean equals centre average with the bent-coordinate offset") {
  const int d = 10;
  TargetPtr t = banana_t_mixture_target(d);
  auto centers = banana_t_mixture_centers(d);
  Vector mean = Vector::Zero(d);
  for (const Vector& c : centers) mean += c;
  mean /= 20.0;
  const double s = 20.0 / std::pow(static_cast<double>(d), 0.25);
  for (int j = 0; j < 5; ++j) mean[2 * j + 1] -= 0.03 * 140.0 / s / 20.0;
  CHECK((*t->true_mean() - mean).norm() < 1e-12);
}

namespace {

SensorData oracle_sensor_data() {
  SensorData data;
  data.known = {Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(0.9, 0.25), Eigen::Vector2d(0.5, 0.85)};
  data.observed = {{1, 2, 0.3},  {1, 9, 0.5},  {2, 10, 0.45}, {3, 11, 0.2}, {4, 9, 0.62},
                   {5, 10, 0.33}, {6, 11, 0.41}, {7, 9, 0.37}, {8, 11, 0.55}};
  return data;
}

Vector oracle_sensor_point() {
  Vector x(16);
  x << 0.2, 0.3, 0.45, 0.5, 0.6, 0.7, 0.3, 0.8, 0.7, 0.2, 0.85, 0.6, 0.15, 0.55, 0.5, 0.1;
  return x;
}

}  // namespace

TEST_CASE("sensor target: frozen brute-force posterior value") {
  TargetPtr t = sensor_network_target(oracle_sensor_data());
  CHECK(t->dim() == 16);
  CHECK(t->log_pdf(oracle_sensor_point()) ==
        doctest::Approx(-265.61414311261406).epsilon(1e-12));
}

TEST_CASE("sensor target: term-by-term oracle at random points") {
  SensorData data = oracle_sensor_data();
  TargetPtr t = sensor_network_target(data);
  Rng rng(24);
  for (int rep = 0; rep < 20; ++rep) {
    Vector x(16);
    for (int m = 0; m < 16; ++m) x[m] = rng.uniform(0.0, 1.0);
    auto pos = [&](int id) -> Eigen::Vector2d {
      if (id <= 8) return x.segment<2>(2 * (id - 1));
      return data.known[id - 9];
    };
    double lp = 0.0;
    for (int i = 1; i <= 8; ++i) {
      for (int j = i + 1; j <= 11; ++j) {
        double r2 = (pos(i) - pos(j)).squaredNorm();
        bool obs = false;
        double y = 0.0;
        for (const auto& o : data.observed)
          if (o.i == i && o.j == j) obs = true, y = o.y;
        if (obs) {
          double e = y - std::sqrt(r2);
          lp += -r2 / 0.18 - e * e / 0.0008;
        } else {
          lp += std::log(1.0 - std::exp(-r2 / 0.18));
        }
      }
    }
    CHECK(t->log_pdf(x) == doctest::Approx(lp).epsilon(1e-11));
  }
}

TEST_CASE("sensor target: unobserved far pairs contribute nothing") {
  SensorData data;
  data.known = {Eigen::Vector2d(300, 300), Eigen::Vector2d(400, 400), Eigen::Vector2d(500, 500)};
  TargetPtr t = sensor_network_target(data);
  Vector x(16);
  for (int j = 0; j < 8; ++j) {
    x[2 * j] = 100.0 * (j + 1);
    x[2 * j + 1] = -50.0 * (j + 1);
  }
  CHECK(t->log_pdf(x) == 0.0);
}

TEST_CASE("sensor target: exact-distance observation leaves only the detection factor") {
  SensorData data;
  data.known = {Eigen::Vector2d(300, 300), Eigen::Vector2d(400, 400), Eigen::Vector2d(500, 500)};
  data.observed = {{1, 2, 0.3}};
  TargetPtr t = sensor_network_target(data);
  Vector x(16);
  x.setZero();
  x[2] = 0.3;  // sensor 2 exactly 0.3 from sensor 1
  for (int j = 2; j < 8; ++j) {
    x[2 * j] = 100.0 * (j + 1);
    x[2 * j + 1] = 80.0 * (j + 1);
  }
  CHECK(t->log_pdf(x) == doctest::Approx(-0.09 / 0.18).epsilon(1e-12));
}

TEST_CASE("sensor target: coincident unobserved pair has zero density") {
  SensorData data;
  data.known = {Eigen::Vector2d(300, 300), Eigen::Vector2d(400, 400), Eigen::Vector2d(500, 500)};
  TargetPtr t = sensor_network_target(data);
  Vector x = oracle_sensor_point();
  x.segment<2>(2) = x.segment<2>(0);  // sensors 1 and 2 coincide
  CHECK(t->log_pdf(x) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("sensor target: analytic gradient matches finite differences") {
  TargetPtr t = sensor_network_target(oracle_sensor_data());
  REQUIRE(t->has_gradient());
  Rng rng(25);
  for (int rep = 0; rep < 100; ++rep) {
    Vector x(16);
    for (int m = 0; m < 16; ++m) x[m] = rng.uniform(0.0, 1.0);
    check_gradient(*t, x);
  }
}

TEST_CASE("sensor observation probability") {
  CHECK(sensor_obs_probability(0.0) == 1.0);
  CHECK(sensor_obs_probability(0.3 * std::sqrt(2.0)) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("simulate_sensor_data: deterministic in the seed") {
  std::vector<Eigen::Vector2d> truths;
  Rng rng(26);
  for (int i = 0; i < 11; ++i) truths.emplace_back(rng.uniform(0, 1), rng.uniform(0, 1));
  SensorData a = simulate_sensor_data(truths, 42);
  SensorData b = simulate_sensor_data(truths, 42);
  REQUIRE(a.observed.size() == b.observed.size());
  for (size_t k = 0; k < a.observed.size(); ++k) {
    CHECK(a.observed[k].i == b.observed[k].i);
    CHECK(a.observed[k].j == b.observed[k].j);
    CHECK(a.observed[k].y == b.observed[k].y);
  }
  for (int k = 0; k < 3; ++k) CHECK(a.known[k] == truths[8 + k]);
}

TEST_CASE("simulate_sensor_data: coincident sensors are always observed") {
  std::vector<Eigen::Vector2d> truths(11, Eigen::Vector2d(0.5, 0.5));
  for (int i = 2; i < 11; ++i) truths[i] = Eigen::Vector2d(0.5 + 0.04 * i, 0.1 + 0.08 * i);
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    SensorData data = simulate_sensor_data(truths, seed);
    bool found = false;
    for (const auto& o : data.observed)
      if (o.i == 1 && o.j == 2) found = true;
    CHECK(found);  // truths[0] == truths[1], detection probability exp(0) = 1
  }
}

TEST_CASE("SensorData: file round trip") {
  std::vector<Eigen::Vector2d> truths;
  Rng rng(27);
  for (int i = 0; i < 11; ++i) truths.emplace_back(rng.uniform(0, 1), rng.uniform(0, 1));
  SensorData data = simulate_sensor_data(truths, 7);
  auto dir = test::temp_dir("sensor-roundtrip");
  std::string path = (dir / "sensors.txt").string();
  data.save(path);
  SensorData back = SensorData::load(path);
  REQUIRE(back.observed.size() == data.observed.size());
  for (size_t k = 0; k < data.observed.size(); ++k) {
    CHECK(back.observed[k].i == data.observed[k].i);
    CHECK(back.observed[k].j == data.observed[k].j);
    CHECK(back.observed[k].y == data.observed[k].y);
  }
  for (int k = 0; k < 3; ++k) CHECK(back.known[k] == data.known[k]);
  CHECK_THROWS_AS(SensorData::load((dir / "missing.txt").string()), IoError);
}

TEST_CASE("make_target wraps plain functions") {
  TargetPtr t = make_target(2, "flat", [](const Vector&) { return 0.0; });
  CHECK(t->dim() == 2);
  CHECK(t->name() == "flat");
  CHECK(t->log_pdf(Vector::Zero(2)) == 0.0);
  CHECK(!t->has_gradient());
  CHECK_THROWS_AS(t->grad_log_pdf(Vector::Zero(2)), Error);
  CHECK(!t->true_mean().has_value());
}
