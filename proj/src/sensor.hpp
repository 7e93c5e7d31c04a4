#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "targets.hpp"

namespace jams {

// Sensor-network localisation data: 11 sensors on the plane, the last 3 at
// known positions, noisy distance observations for a subset of pairs.  The
// posterior over the 8 unknown positions is 16-dimensional.
struct SensorData {
  static constexpr int kSensors = 11;
  static constexpr int kKnown = 3;
  static constexpr int kUnknown = kSensors - kKnown;  // 8
  static constexpr int kDim = 2 * kUnknown;           // 16

  struct Obs {
    int i, j;  // 1-based sensor ids, i < j
    double y;  // observed distance
  };

  std::vector<Eigen::Vector2d> known;  // positions of sensors 9..11
  std::vector<Obs> observed;

  void validate() const;  // throws ConfigError

  // Plain text round-trip:
  //   sensors 11 known 3 dim 2
  //   known <id> <x> <y>      (one line per known sensor)
  //   obs <i> <j> <y>         (one line per observed pair)
  static SensorData load(const std::string& path);
  void save(const std::string& path) const;
};

// Probability that a pair at distance `dist` is observed: exp(-dist^2 / (2*0.3^2)).
double sensor_obs_probability(double dist);

// Draw synthetic data from the model given the 11 true sensor positions
// (unknown sensors first).  Deterministic in `seed`.
SensorData simulate_sensor_data(const std::vector<Eigen::Vector2d>& true_positions,
                                std::uint64_t seed);

// Log posterior of the unknown positions under a flat improper prior.  Returns
// -inf when an unobserved pair coincides exactly.
TargetPtr sensor_network_target(const SensorData& data);

}  // namespace jams
