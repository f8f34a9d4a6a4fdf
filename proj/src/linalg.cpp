#include "rsr/linalg.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "rsr/error.hpp"

namespace rsr {

ProjectionCache::ProjectionCache(const Matrix& x) : x_(x) {
  const Index n = x.rows();
  const Index p = x.cols();
  if (p < 1 || n <= p) {
    throw Error(Errc::DimensionError,
                "design must satisfy n > p >= 1 (got n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");
  }
  if (!x.allFinite()) throw Error(Errc::NonFinite, "design matrix contains non-finite entries");

  Eigen::HouseholderQR<Matrix> qr(x);
  r_ = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Vector diag = r_.diagonal().cwiseAbs();
  if (diag.minCoeff() <= 1e-10 * diag.maxCoeff()) {
    throw Error(Errc::RankDeficient, "design matrix is numerically rank deficient");
  }

  const Matrix full_q = qr.householderQ();
  q_ = full_q.leftCols(p);
  l_ = full_q.rightCols(n - p);
  canonicalize_column_signs(l_);

  const Matrix r_inv = r_.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
  xtx_inv_ = r_inv * r_inv.transpose();
}

Vector ProjectionCache::project(const Vector& v) const {
  if (v.size() != rows()) throw Error(Errc::DimensionError, "projection operand has the wrong length");
  return q_ * (q_.transpose() * v);
}

Vector ProjectionCache::residual(const Vector& v) const { return v - project(v); }

Matrix ProjectionCache::residual(const Matrix& m) const {
  if (m.rows() != rows()) throw Error(Errc::DimensionError, "projection operand has the wrong row count");
  return m - q_ * (q_.transpose() * m);
}

Vector ProjectionCache::coefficients(const Vector& v) const {
  if (v.size() != rows()) throw Error(Errc::DimensionError, "coefficient operand has the wrong length");
  return r_.triangularView<Eigen::Upper>().solve(q_.transpose() * v);
}

Vector ProjectionCache::solve_r(const Vector& z) const {
  if (z.size() != cols()) throw Error(Errc::DimensionError, "R solve operand has the wrong length");
  return r_.triangularView<Eigen::Upper>().solve(z);
}

ProjectionCache build_projection_cache(const Matrix& x) { return ProjectionCache(x); }

Vector SpdFactor::solve(const Vector& b) const {
  if (b.size() != size()) throw Error(Errc::DimensionError, "right-hand side has the wrong length");
  return solve_upper(solve_lower(b));
}

Matrix SpdFactor::solve(const Matrix& b) const {
  if (b.rows() != size()) throw Error(Errc::DimensionError, "right-hand side has the wrong row count");
  const Matrix half = lower_.triangularView<Eigen::Lower>().solve(b);
  return lower_.transpose().triangularView<Eigen::Upper>().solve(half);
}

Vector SpdFactor::solve_lower(const Vector& b) const { return lower_.triangularView<Eigen::Lower>().solve(b); }

Vector SpdFactor::solve_upper(const Vector& b) const {
  return lower_.transpose().triangularView<Eigen::Upper>().solve(b);
}

double max_asymmetry(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

SpdFactor chol_spd(const Matrix& m, double jitter) {
  if (m.rows() != m.cols()) throw Error(Errc::DimensionError, "Cholesky requires a square matrix");
  if (jitter < 0.0 || !std::isfinite(jitter)) throw Error(Errc::DimensionError, "jitter must be a finite nonnegative value");
  if (!m.allFinite()) throw Error(Errc::NonFinite, "matrix contains non-finite entries");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (max_asymmetry(m) > 1e-10 * scale) throw Error(Errc::NotPositiveDefinite, "matrix is not symmetric");

  Matrix shifted = m;
  shifted.diagonal().array() += jitter;
  Eigen::LLT<Matrix> llt(shifted.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) throw Error(Errc::NotPositiveDefinite, "Cholesky factorization failed");

  SpdFactor f;
  f.lower_ = llt.matrixL();
  const Vector diag = f.lower_.diagonal();
  if (!(diag.array() > 0.0).all() || !diag.allFinite()) {
    throw Error(Errc::NotPositiveDefinite, "Cholesky factor has a nonpositive pivot");
  }
  f.log_det_ = 2.0 * diag.array().log().sum();
  f.jitter_ = jitter;
  return f;
}

Vector solve_spd(const SpdFactor& factor, const Vector& b) { return factor.solve(b); }

Matrix solve_spd(const SpdFactor& factor, const Matrix& b) { return factor.solve(b); }

SymmetricSpectrum spectral_decomposition(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(Errc::DimensionError, "eigendecomposition requires a square matrix");
  if (!m.allFinite()) throw Error(Errc::NonFinite, "matrix contains non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()));
  if (solver.info() != Eigen::Success) throw Error(Errc::NotPositiveDefinite, "eigendecomposition did not converge");
  return {solver.eigenvectors(), solver.eigenvalues()};
}

void canonicalize_column_signs(Matrix& m, double tol) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) {
      if (std::abs(m(i, j)) > tol) {
        if (m(i, j) < 0.0) m.col(j) *= -1.0;
        break;
      }
    }
  }
}

} // namespace rsr
