#pragma once

#include <functional>

#include <Eigen/Dense>

#include "error.hpp"

namespace jams {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using ScalarField = std::function<double(const Vector&)>;

// Lower-triangular Cholesky factor L with a = L L^T.  Requires a symmetric
// positive-definite input; throws NotPositiveDefinite when a pivot <= 0 and
// NonFiniteValue when the input contains NaN/Inf.
Matrix cholesky(const Matrix& a);

// Symmetric positive-definite matrix, validated at construction (symmetry
// within 1e-12 relative tolerance, successful Cholesky factorisation).
// Caches the lower factor and log-determinant for repeated density work.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix m);

  const Matrix& value() const { return m_; }
  const Matrix& chol_lower() const { return chol_; }
  double log_det() const { return log_det_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  Matrix m_;
  Matrix chol_;
  double log_det_;
};

// Eigenvalues of a^{-1} b for SPD a, b, in ascending order.  Computed through
// the symmetric similarity L^{-1} b L^{-T} (L the Cholesky factor of a); all
// returned values are real and strictly positive.
Vector relative_eigenvalues(const SpdMatrix& a, const SpdMatrix& b);

// Inverse of an SPD matrix via its Cholesky factorisation.
Matrix spd_inverse(const SpdMatrix& a);

// Central-difference gradient with per-coordinate step max(1e-5, 1e-5*|x_j|).
// Throws NonFiniteValue when any stencil evaluation is non-finite.
Vector fd_gradient(const ScalarField& f, const Vector& x);

// Central-difference Hessian with per-coordinate step max(1e-4, 1e-4*|x_j|),
// symmetrised.  Throws NonFiniteValue when any stencil evaluation is
// non-finite.
Matrix fd_hessian(const ScalarField& f, const Vector& x);

// log(sum_i exp(v_i)); returns -inf for an empty or all-(-inf) input.
double logsumexp(const Vector& v);

// Squared Mahalanobis norm ||L^{-1} d||^2 given a lower Cholesky factor L.
double mahalanobis_sq(const Matrix& chol_lower, const Vector& d);

}  // namespace jams
