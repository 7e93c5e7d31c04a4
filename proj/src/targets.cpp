#include "targets.hpp"

#include <cmath>
#include <utility>

namespace jams {

namespace {

class FunctionalTarget final : public Target {
 public:
  FunctionalTarget(int dim, std::string name, ScalarField log_pdf,
                   std::function<Vector(const Vector&)> grad, std::optional<Vector> mean)
      : dim_(dim),
        name_(std::move(name)),
        log_pdf_(std::move(log_pdf)),
        grad_(std::move(grad)),
        mean_(std::move(mean)) {}

  int dim() const override { return dim_; }
  const std::string& name() const override { return name_; }
  double log_pdf(const Vector& x) const override { return log_pdf_(x); }
  bool has_gradient() const override { return static_cast<bool>(grad_); }
  Vector grad_log_pdf(const Vector& x) const override {
    if (!grad_) return Target::grad_log_pdf(x);
    return grad_(x);
  }
  std::optional<Vector> true_mean() const override { return mean_; }

 private:
  int dim_;
  std::string name_;
  ScalarField log_pdf_;
  std::function<Vector(const Vector&)> grad_;
  std::optional<Vector> mean_;
};

// log N(x; mu*1, var*I)
double log_iso_normal(const Vector& x, double mu, double var) {
  const double d = static_cast<double>(x.size());
  double q = (x.array() - mu).matrix().squaredNorm();
  return -0.5 * d * std::log(2.0 * M_PI * var) - 0.5 * q / var;
}

class GaussianMixture final : public Target {
 public:
  GaussianMixture(int dim, double var1, double var2, double w1)
      : dim_(dim), var1_(var1), var2_(var2), w1_(w1) {
    if (dim < 1) throw ConfigError("gaussian_mixture: dim must be >= 1");
    if (!(var1 > 0.0) || !(var2 > 0.0)) throw ConfigError("gaussian_mixture: variances must be > 0");
    if (!(w1 > 0.0) || !(w1 < 1.0)) throw ConfigError("gaussian_mixture: weight must be in (0,1)");
  }

  int dim() const override { return dim_; }
  const std::string& name() const override { return name_; }

  double log_pdf(const Vector& x) const override {
    double a = std::log(w1_) + log_iso_normal(x, -1.0, var1_);
    double b = std::log(1.0 - w1_) + log_iso_normal(x, 1.0, var2_);
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
  }

  bool has_gradient() const override { return true; }

  Vector grad_log_pdf(const Vector& x) const override {
    double a = std::log(w1_) + log_iso_normal(x, -1.0, var1_);
    double b = std::log(1.0 - w1_) + log_iso_normal(x, 1.0, var2_);
    double m = std::max(a, b);
    double ra = std::exp(a - m), rb = std::exp(b - m);
    double z = ra + rb;
    ra /= z;
    rb /= z;
    return -(ra / var1_) * (x.array() + 1.0).matrix() - (rb / var2_) * (x.array() - 1.0).matrix();
  }

  std::optional<Vector> true_mean() const override {
    return Vector::Constant(dim_, 1.0 - 2.0 * w1_);
  }

 private:
  int dim_;
  double var1_, var2_, w1_;
  std::string name_ = "gaussian_mixture";
};

// Centres of the classic 20-component bivariate mixture of Kou, Zhou & Wong
// (2006), used verbatim (externally sourced data).
constexpr double kMixtureCenters2d[20][2] = {
    {2.18, 5.76}, {8.67, 9.59}, {4.24, 8.48}, {8.41, 1.68}, {3.93, 8.82},
    {3.25, 3.47}, {1.70, 0.50}, {4.59, 5.60}, {6.91, 5.81}, {6.87, 5.40},
    {5.41, 2.65}, {2.70, 7.88}, {4.98, 3.70}, {1.14, 2.39}, {8.33, 9.50},
    {4.93, 1.50}, {1.83, 0.09}, {2.26, 0.31}, {5.54, 6.86}, {1.69, 8.11},
};

// log t_nu(z; 0, Sigma) given the squared Mahalanobis norm q = z' Sigma^{-1} z.
double log_t_quad(double q, double nu, double d, double log_det_sigma) {
  return std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) - 0.5 * d * std::log(nu * M_PI) -
         0.5 * log_det_sigma - 0.5 * (nu + d) * std::log1p(q / nu);
}

class BananaTMixture final : public Target {
 public:
  explicit BananaTMixture(int dim) : dim_(dim) {
    if (dim < 10) throw ConfigError("banana_t: dim must be >= 10 (bent coordinates reach 10)");
    centers_ = banana_t_mixture_centers(dim);
    s_ = 20.0 / std::pow(static_cast<double>(dim), 0.25);
    t_scale_ = 0.01 * std::sqrt(static_cast<double>(dim));
    log_det_t_ = dim * std::log(t_scale_);
    log_det_c_ = std::log(100.0);  // diag(100, 1, ..., 1)
    // Mixture mean: t components sit at their centres; each banana component's
    // mean is offset along its bent coordinate by -b E[z1^2]/s with
    // E[z1^2] = 100 * nu/(nu-2) = 140 under the t7 shape.
    mean_ = Vector::Zero(dim);
    for (int j = 0; j < 20; ++j) mean_ += centers_[j];
    mean_ /= 20.0;
    for (int j = 0; j < 5; ++j) mean_[bent_index(j)] -= kBend * 140.0 / s_ / 20.0;
  }

  int dim() const override { return dim_; }
  const std::string& name() const override { return name_; }

  double log_pdf(const Vector& x) const override {
    Vector lc(20);
    Vector u(dim_);
    for (int j = 0; j < 20; ++j) lc[j] = kLogWeight + component_log_pdf(j, x, u, nullptr);
    return logsumexp(lc);
  }

  bool has_gradient() const override { return true; }

  Vector grad_log_pdf(const Vector& x) const override {
    Vector lc(20);
    std::vector<Vector> grads(20);
    Vector u(dim_);
    for (int j = 0; j < 20; ++j) {
      grads[j].resize(dim_);
      lc[j] = kLogWeight + component_log_pdf(j, x, u, &grads[j]);
    }
    double m = lc.maxCoeff();
    Vector g = Vector::Zero(dim_);
    double z = 0.0;
    for (int j = 0; j < 20; ++j) {
      double r = std::exp(lc[j] - m);
      z += r;
      g += r * grads[j];
    }
    return g / z;
  }

  std::optional<Vector> true_mean() const override { return mean_; }

 private:
  static constexpr double kNu = 7.0;
  static constexpr double kBend = 0.03;
  static constexpr double kLogWeight = -2.9957322735539909;  // log(0.05)

  static int bent_index(int j) { return 2 * j + 1; }  // coordinates 2,4,6,8,10 (1-based)

  // log of component j's density at x; when grad != nullptr also writes
  // d(log pdf)/dx into *grad.  u is scratch space.
  double component_log_pdf(int j, const Vector& x, Vector& u, Vector* grad) const {
    if (j < 5) {
      // Banana-shaped: z = s(x - mu); bend coordinate c by +b z1^2; t7 with
      // shape C = diag(100,1,...,1); density rescaled by s^d.
      const int c = bent_index(j);
      u = s_ * (x - centers_[j]);
      u[c] += kBend * u[0] * u[0];
      double q = u.squaredNorm() - u[0] * u[0] + u[0] * u[0] / 100.0;
      double lp = dim_ * std::log(s_) + log_t_quad(q, kNu, dim_, log_det_c_);
      if (grad) {
        // v = d(log t)/dz = -(nu+d)/(nu+q) C^{-1} z; chain rule through the bend.
        double coef = -(kNu + dim_) / (kNu + q);
        Vector v = coef * u;
        v[0] /= 100.0;
        *grad = s_ * v;
        (*grad)[0] += s_ * (2.0 * kBend * u[0]) * v[c];
      }
      return lp;
    }
    u = x - centers_[j];
    double q = u.squaredNorm() / t_scale_;
    double lp = log_t_quad(q, kNu, dim_, log_det_t_);
    if (grad) {
      *grad = (-(kNu + dim_) / (kNu + q) / t_scale_) * u;
    }
    return lp;
  }

  int dim_;
  double s_, t_scale_, log_det_t_, log_det_c_;
  std::vector<Vector> centers_;
  Vector mean_;
  std::string name_ = "banana_t";
};

}  // namespace

TargetPtr make_target(int dim, std::string name, ScalarField log_pdf,
                      std::function<Vector(const Vector&)> grad_log_pdf,
                      std::optional<Vector> true_mean) {
  return std::make_shared<FunctionalTarget>(dim, std::move(name), std::move(log_pdf),
                                            std::move(grad_log_pdf), std::move(true_mean));
}

TargetPtr gaussian_mixture_target(int dim) {
  double unit = std::sqrt(dim / 100.0);
  return std::make_shared<GaussianMixture>(dim, 0.5 * unit, unit, 0.5);
}

TargetPtr gaussian_mixture_target(int dim, double var1, double var2, double weight1) {
  return std::make_shared<GaussianMixture>(dim, var1, var2, weight1);
}

TargetPtr banana_t_mixture_target(int dim) { return std::make_shared<BananaTMixture>(dim); }

std::vector<Vector> banana_t_mixture_centers(int dim) {
  std::vector<Vector> centers(20);
  for (int j = 0; j < 20; ++j) {
    centers[j].resize(dim);
    for (int m = 0; m < dim; ++m) centers[j][m] = kMixtureCenters2d[j][m % 2];
  }
  return centers;
}

}  // namespace jams
