#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace jams {

// Unnormalised target density on R^d.  log_pdf returns -inf wherever the
// density vanishes; it must never return NaN for finite input.
class Target {
 public:
  virtual ~Target() = default;
  virtual int dim() const = 0;
  virtual const std::string& name() const = 0;
  virtual double log_pdf(const Vector& x) const = 0;
  virtual bool has_gradient() const { return false; }
  virtual Vector grad_log_pdf(const Vector&) const {
    throw Error(ErrorCode::Numeric, "target '" + name() + "' has no analytic gradient");
  }
  // Known mean of the normalised density, when available (used for error
  // reporting in benchmarks).
  virtual std::optional<Vector> true_mean() const { return std::nullopt; }
};

using TargetPtr = std::shared_ptr<const Target>;

// Wrap plain functions as a target (used by tests and custom experiments).
TargetPtr make_target(int dim, std::string name, ScalarField log_pdf,
                      std::function<Vector(const Vector&)> grad_log_pdf = nullptr,
                      std::optional<Vector> true_mean = std::nullopt);

// Two-component isotropic Gaussian mixture:
//   0.5 N(-1, s1 I) + 0.5 N(+1, s2 I),  s1 = 0.5 sqrt(d/100), s2 = sqrt(d/100).
TargetPtr gaussian_mixture_target(int dim);
// Same shape with explicit component variances (benchmark/testing variant).
TargetPtr gaussian_mixture_target(int dim, double var1, double var2, double weight1 = 0.5);

// Twenty-component mixture in d >= 10 dimensions, equal weights 0.05.
// Components 1-5 are "banana-shaped" (a t7 density with shape diag(100,1,..,1)
// composed with a quadratic bend of coordinate 2j driven by coordinate 1);
// components 6-20 are t7 densities with shape 0.01*sqrt(d)*I.  All components
// are rescaled by s = 20/d^{1/4} and centred so each of the 20 centres is an
// exact mode of its component.
TargetPtr banana_t_mixture_target(int dim);

// Mode centres of the banana/t mixture (2-d base points tiled across
// coordinates), exposed for diagnostics and tests.
std::vector<Vector> banana_t_mixture_centers(int dim);

}  // namespace jams
