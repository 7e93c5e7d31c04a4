#include "numerics.hpp"

#include <cmath>
#include <limits>

namespace jams {

Matrix cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) throw NotPositiveDefinite("cholesky: matrix is not square");
  if (!a.allFinite()) throw NonFiniteValue("cholesky: input contains non-finite entries");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotPositiveDefinite("cholesky: encountered a non-positive pivot");
  }
  return llt.matrixL();
}

SpdMatrix::SpdMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw NotPositiveDefinite("SpdMatrix: matrix is not square");
  double scale = m_.cwiseAbs().maxCoeff();
  double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1.0)) {
    throw NotPositiveDefinite("SpdMatrix: matrix is not symmetric");
  }
  chol_ = cholesky(m_);
  log_det_ = 2.0 * chol_.diagonal().array().log().sum();
}

Vector relative_eigenvalues(const SpdMatrix& a, const SpdMatrix& b) {
  if (a.dim() != b.dim()) throw NotPositiveDefinite("relative_eigenvalues: dimension mismatch");
  const Matrix& l = a.chol_lower();
  // M = L^{-1} b L^{-T}, similar to a^{-1} b but symmetric.
  Matrix m = l.triangularView<Eigen::Lower>().solve(b.value());
  m = l.triangularView<Eigen::Lower>().solve(m.transpose()).eval();
  m = (0.5 * (m + m.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) {
    throw NotPositiveDefinite("relative_eigenvalues: eigendecomposition failed");
  }
  return es.eigenvalues();
}

Matrix spd_inverse(const SpdMatrix& a) {
  const Matrix& l = a.chol_lower();
  Matrix inv = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(a.dim(), a.dim()));
  return l.transpose().triangularView<Eigen::Upper>().solve(inv);
}

namespace {

double checked_eval(const ScalarField& f, const Vector& x) {
  double v = f(x);
  if (!std::isfinite(v)) {
    throw NonFiniteValue("finite-difference stencil hit a non-finite value");
  }
  return v;
}

}  // namespace

Vector fd_gradient(const ScalarField& f, const Vector& x) {
  const int d = static_cast<int>(x.size());
  Vector g(d);
  Vector xp = x;
  for (int j = 0; j < d; ++j) {
    double h = std::max(1e-5, 1e-5 * std::abs(x[j]));
    xp[j] = x[j] + h;
    double fp = checked_eval(f, xp);
    xp[j] = x[j] - h;
    double fm = checked_eval(f, xp);
    xp[j] = x[j];
    g[j] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Matrix fd_hessian(const ScalarField& f, const Vector& x) {
  const int d = static_cast<int>(x.size());
  Matrix h(d, d);
  Vector step(d);
  for (int j = 0; j < d; ++j) step[j] = std::max(1e-4, 1e-4 * std::abs(x[j]));

  double f0 = checked_eval(f, x);
  Vector xp = x;
  for (int j = 0; j < d; ++j) {
    xp[j] = x[j] + step[j];
    double fp = checked_eval(f, xp);
    xp[j] = x[j] - step[j];
    double fm = checked_eval(f, xp);
    xp[j] = x[j];
    h(j, j) = (fp - 2.0 * f0 + fm) / (step[j] * step[j]);
  }
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      xp[j] = x[j] + step[j];
      xp[k] = x[k] + step[k];
      double fpp = checked_eval(f, xp);
      xp[k] = x[k] - step[k];
      double fpm = checked_eval(f, xp);
      xp[j] = x[j] - step[j];
      double fmm = checked_eval(f, xp);
      xp[k] = x[k] + step[k];
      double fmp = checked_eval(f, xp);
      xp[j] = x[j];
      xp[k] = x[k];
      double v = (fpp - fpm - fmp + fmm) / (4.0 * step[j] * step[k]);
      h(j, k) = v;
      h(k, j) = v;
    }
  }
  return h;
}

double logsumexp(const Vector& v) {
  if (v.size() == 0) return -std::numeric_limits<double>::infinity();
  double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf (or a stray +inf propagates)
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

double mahalanobis_sq(const Matrix& chol_lower, const Vector& d) {
  return chol_lower.triangularView<Eigen::Lower>().solve(d).squaredNorm();
}

}  // namespace jams
