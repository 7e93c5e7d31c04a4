#include "sensor.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "rng.hpp"

namespace jams {

namespace {

// Detection kernel scale 2 * 0.3^2 and observation noise scale 2 * 0.02^2.
constexpr double kDet2 = 0.18;
constexpr double kNoise2 = 0.0008;
constexpr double kNoiseSd = 0.02;

int pair_key(int i, int j) { return i * 12 + j; }

class SensorNetworkTarget final : public Target {
 public:
  explicit SensorNetworkTarget(SensorData data) : data_(std::move(data)) {
    data_.validate();
    obs_y_.fill(0.0);
    obs_flag_.fill(false);
    for (const auto& o : data_.observed) {
      obs_flag_[pair_key(o.i, o.j)] = true;
      obs_y_[pair_key(o.i, o.j)] = o.y;
    }
  }

  int dim() const override { return SensorData::kDim; }
  const std::string& name() const override { return name_; }

  double log_pdf(const Vector& x) const override {
    double lp = 0.0;
    for (int i = 1; i <= SensorData::kUnknown; ++i) {
      for (int j = i + 1; j <= SensorData::kSensors; ++j) {
        Eigen::Vector2d d = position(x, i) - position(x, j);
        double r2 = d.squaredNorm();
        if (obs_flag_[pair_key(i, j)]) {
          double r = std::sqrt(r2);
          double e = obs_y_[pair_key(i, j)] - r;
          lp += -r2 / kDet2 - e * e / kNoise2;
        } else {
          if (r2 == 0.0) return -std::numeric_limits<double>::infinity();
          lp += std::log(-std::expm1(-r2 / kDet2));
        }
      }
    }
    return lp;
  }

  bool has_gradient() const override { return true; }

  Vector grad_log_pdf(const Vector& x) const override {
    Vector g = Vector::Zero(SensorData::kDim);
    for (int i = 1; i <= SensorData::kUnknown; ++i) {
      for (int j = i + 1; j <= SensorData::kSensors; ++j) {
        Eigen::Vector2d d = position(x, i) - position(x, j);
        double r2 = d.squaredNorm();
        Eigen::Vector2d gi;
        if (obs_flag_[pair_key(i, j)]) {
          double r = std::sqrt(r2);
          gi = (-2.0 / kDet2) * d;
          if (r > 0.0) {
            double e = obs_y_[pair_key(i, j)] - r;
            gi += (2.0 * e / kNoise2 / r) * d;
          }
        } else {
          if (r2 == 0.0) continue;  // log pdf is -inf here anyway
          gi = (2.0 / kDet2 / std::expm1(r2 / kDet2)) * d;
        }
        g.segment<2>(2 * (i - 1)) += gi;
        if (j <= SensorData::kUnknown) g.segment<2>(2 * (j - 1)) -= gi;
      }
    }
    return g;
  }

 private:
  Eigen::Vector2d position(const Vector& x, int id) const {
    if (id <= SensorData::kUnknown) return x.segment<2>(2 * (id - 1));
    return data_.known[id - SensorData::kUnknown - 1];
  }

  SensorData data_;
  std::array<double, 144> obs_y_;
  std::array<bool, 144> obs_flag_;
  std::string name_ = "sensor";
};

}  // namespace

void SensorData::validate() const {
  if (static_cast<int>(known.size()) != kKnown) {
    throw ConfigError("sensor data: expected " + std::to_string(kKnown) + " known sensors");
  }
  for (const auto& z : known) {
    if (!z.allFinite()) throw ConfigError("sensor data: non-finite known position");
  }
  std::array<bool, 144> seen{};
  for (const auto& o : observed) {
    if (o.i < 1 || o.j <= o.i || o.j > kSensors || o.i > kUnknown) {
      throw ConfigError("sensor data: bad pair (" + std::to_string(o.i) + "," +
                        std::to_string(o.j) + ")");
    }
    if (!std::isfinite(o.y)) throw ConfigError("sensor data: non-finite observation");
    if (seen[pair_key(o.i, o.j)]) {
      throw ConfigError("sensor data: duplicate pair (" + std::to_string(o.i) + "," +
                        std::to_string(o.j) + ")");
    }
    seen[pair_key(o.i, o.j)] = true;
  }
}

SensorData SensorData::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sensor data file: " + path);
  std::string word;
  int n_sensors = 0, n_known = 0, n_dim = 0;
  std::string k1, k2, k3;
  if (!(in >> k1 >> n_sensors >> k2 >> n_known >> k3 >> n_dim) || k1 != "sensors" ||
      k2 != "known" || k3 != "dim" || n_sensors != kSensors || n_known != kKnown || n_dim != 2) {
    throw ConfigError("sensor data: bad header in " + path +
                      " (expected 'sensors 11 known 3 dim 2')");
  }
  SensorData data;
  data.known.assign(kKnown, Eigen::Vector2d::Zero());
  std::vector<bool> have_known(kKnown, false);
  while (in >> word) {
    if (word == "known") {
      int id;
      double zx, zy;
      if (!(in >> id >> zx >> zy)) throw ConfigError("sensor data: truncated 'known' line");
      if (id <= kUnknown || id > kSensors) {
        throw ConfigError("sensor data: 'known' id out of range: " + std::to_string(id));
      }
      data.known[id - kUnknown - 1] = Eigen::Vector2d(zx, zy);
      have_known[id - kUnknown - 1] = true;
    } else if (word == "obs") {
      Obs o;
      if (!(in >> o.i >> o.j >> o.y)) throw ConfigError("sensor data: truncated 'obs' line");
      data.observed.push_back(o);
    } else {
      throw ConfigError("sensor data: unexpected token '" + word + "' in " + path);
    }
  }
  for (int k = 0; k < kKnown; ++k) {
    if (!have_known[k]) {
      throw ConfigError("sensor data: missing known sensor " + std::to_string(kUnknown + 1 + k));
    }
  }
  data.validate();
  return data;
}

void SensorData::save(const std::string& path) const {
  validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write sensor data file: " + path);
  char buf[128];
  out << "sensors " << kSensors << " known " << kKnown << " dim 2\n";
  for (int k = 0; k < kKnown; ++k) {
    std::snprintf(buf, sizeof buf, "known %d %.17g %.17g\n", kUnknown + 1 + k, known[k][0],
                  known[k][1]);
    out << buf;
  }
  for (const auto& o : observed) {
    std::snprintf(buf, sizeof buf, "obs %d %d %.17g\n", o.i, o.j, o.y);
    out << buf;
  }
  if (!out) throw IoError("failed writing sensor data file: " + path);
}

double sensor_obs_probability(double dist) { return std::exp(-dist * dist / kDet2); }

SensorData simulate_sensor_data(const std::vector<Eigen::Vector2d>& true_positions,
                                std::uint64_t seed) {
  if (static_cast<int>(true_positions.size()) != SensorData::kSensors) {
    throw ConfigError("simulate_sensor_data: expected 11 true positions");
  }
  Rng rng(seed);
  SensorData data;
  data.known.assign(true_positions.end() - SensorData::kKnown, true_positions.end());
  for (int i = 1; i <= SensorData::kUnknown; ++i) {
    for (int j = i + 1; j <= SensorData::kSensors; ++j) {
      double r = (true_positions[i - 1] - true_positions[j - 1]).norm();
      if (rng.u01() <= sensor_obs_probability(r)) {
        data.observed.push_back({i, j, r + kNoiseSd * rng.normal()});
      }
    }
  }
  return data;
}

TargetPtr sensor_network_target(const SensorData& data) {
  return std::make_shared<SensorNetworkTarget>(data);
}

}  // namespace jams
