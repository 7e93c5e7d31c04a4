#pragma once

#include <unistd.h>

#include <filesystem>
#include <memory>
#include <string>
#include <utility>

#include "kernels.hpp"
#include "rng.hpp"
#include "targets.hpp"

namespace jams::test {

// Random SPD matrix A A^T / d + jitter I.
inline Matrix random_spd(int d, Rng& rng, double jitter = 0.5) {
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  Matrix m = a * a.transpose() / static_cast<double>(d);
  m.diagonal().array() += jitter;
  return 0.5 * (m + m.transpose());
}

inline Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

inline Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// Owns everything a KernelContext borrows, so kernel ops can be exercised in
// isolation.  Members are ordered so ctx is constructed last.
struct KernelFixture {
  TargetPtr target;
  ModeSet modes;
  AugmentedParams params;
  KernelContext ctx;

  KernelFixture(TargetPtr t, ModeSet m, AugmentedParams p)
      : target(std::move(t)), modes(std::move(m)), params(std::move(p)), ctx(*target, modes, params) {}
};

// Three-mode d=2 configuration with asymmetric jump matrix; the shared target
// of the frozen kernel oracles.
inline std::unique_ptr<KernelFixture> oracle_fixture(
    EllipticalKind q_kind = EllipticalKind::student_t(7.0)) {
  ModeSet modes;
  modes.mu = {vec2(0, 0), vec2(3, 1), vec2(-2, 2)};
  modes.hessian = {Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  modes.log_pi = {0.0, 0.0, 0.0};

  AugmentedParams params;
  params.sigma = {SpdMatrix(mat2(1, 0.3, 0.3, 1.5)), SpdMatrix(mat2(2, -0.4, -0.4, 0.8)),
                  SpdMatrix(mat2(0.6, 0.1, 0.1, 0.9))};
  Vector w(3);
  w << 0.5, 0.3, 0.2;
  params.weights = w;
  Matrix a(3, 3);
  a << 0.0, 0.7, 0.3, 0.2, 0.0, 0.8, 0.5, 0.5, 0.0;
  params.jump_probs = a;
  params.q_kind = q_kind;

  return std::make_unique<KernelFixture>(gaussian_mixture_target(2), std::move(modes),
                                         std::move(params));
}

// Fresh directory under the system temp root.
inline std::filesystem::path temp_dir(const std::string& stem) {
  static int counter = 0;
  auto p = std::filesystem::temp_directory_path() /
           (stem + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace jams::test
