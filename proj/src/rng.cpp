#include "rng.hpp"

#include <cmath>
#include <stdexcept>

namespace jams {

double Rng::gamma(double alpha) {
  if (alpha < 1.0) throw std::invalid_argument("Rng::gamma requires alpha >= 1");
  // Marsaglia & Tsang (2000).
  double d = alpha - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = u01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

int Rng::discrete(const Eigen::VectorXd& weights) {
  double total = weights.sum();
  double u = u01() * total;
  double acc = 0.0;
  int last = -1;
  for (int i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last = i;
    acc += weights[i];
    if (u <= acc) return i;
  }
  if (last < 0) throw std::invalid_argument("Rng::discrete: all weights zero");
  return last;  // guard against round-off at the top end
}

}  // namespace jams
