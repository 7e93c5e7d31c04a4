#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace jams {

// First-level tags for derived substreams; keeps the units of work that draw
// randomness on non-overlapping streams no matter how they are scheduled.
namespace stream {
constexpr std::uint64_t kStarts = 1;       // mode-search start points
constexpr std::uint64_t kModeSearch = 2;   // (reserved) per-start search noise
constexpr std::uint64_t kBurninChain = 3;  // + (mode, round)
constexpr std::uint64_t kMainChain = 4;
constexpr std::uint64_t kAir = 5;          // update-time schedule
constexpr std::uint64_t kSensorSim = 6;    // synthetic observation data
}  // namespace stream

// Seedable random stream with deterministic substream derivation.
//
// Substreams are derived by mixing (seed, tag...) through splitmix64, so any
// unit of work (a BFGS start, a per-mode burn-in chain in a given round, a
// replication) gets its own stream and results do not depend on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(mix(seed)) {}

  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = seed;
    for (std::uint64_t t : tags) s = mix(s + 0x9e3779b97f4a7c15ull * (t + 1));
    return Rng(s);
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on (0, 1]: 53-bit resolution, never exactly 0 (safe under log).
  double u01() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on [lo, hi].
  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  // Uniform integer on {0, 1, ..., n} (inclusive).
  std::uint64_t uniform_int_inclusive(std::uint64_t n) {
    if (n == 0) return 0;
    // Rejection sampling over the smallest covering power-of-two range.
    std::uint64_t range = n + 1;
    std::uint64_t mask = ~0ull >> std::countl_zero(range - 1 | 1);
    std::uint64_t v;
    do {
      v = next_u64() & mask;
    } while (v >= range);
    return v;
  }

  // Standard normal via Box-Muller (stateless: the spare variate is dropped).
  double normal() {
    double u1 = u01();
    double u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  Eigen::VectorXd normal_vec(int d) {
    Eigen::VectorXd z(d);
    for (int i = 0; i < d; ++i) z[i] = normal();
    return z;
  }

  // Gamma(alpha, 1) for alpha >= 1 (Marsaglia-Tsang squeeze method).
  double gamma(double alpha);

  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

  // Sample an index from a discrete distribution given linear-scale weights
  // (need not be normalised; all >= 0, at least one > 0).
  int discrete(const Eigen::VectorXd& weights);

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace jams
