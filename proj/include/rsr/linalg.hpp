#pragma once

#include <Eigen/Core>

namespace rsr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thin-QR view of a full-column-rank design matrix X.
///
/// Holds Q (n x p), R (p x p), the orthonormal complement basis L (n x (n-p))
/// and (X'X)^{-1}. The projection P = X(X'X)^{-1}X' is only ever applied as
/// Q(Q'v); no dense n x n projector is formed.
///
/// Each column of L has its first nonzero entry positive.
class ProjectionCache {
public:
  explicit ProjectionCache(const Matrix& x);

  Index rows() const noexcept { return q_.rows(); }
  Index cols() const noexcept { return q_.cols(); }

  const Matrix& design() const noexcept { return x_; }
  const Matrix& q() const noexcept { return q_; }
  const Matrix& r() const noexcept { return r_; }
  const Matrix& complement() const noexcept { return l_; }
  const Matrix& xtx_inv() const noexcept { return xtx_inv_; }

  /// P v
  Vector project(const Vector& v) const;
  /// (I - P) v
  Vector residual(const Vector& v) const;
  Matrix residual(const Matrix& m) const;
  /// (X'X)^{-1} X' v, computed as R^{-1} Q' v.
  Vector coefficients(const Vector& v) const;
  /// R^{-1} z; if z ~ N(0, I_p) the result is N(0, (X'X)^{-1}).
  Vector solve_r(const Vector& z) const;

private:
  Matrix x_;
  Matrix q_;
  Matrix r_;
  Matrix l_;
  Matrix xtx_inv_;
};

ProjectionCache build_projection_cache(const Matrix& x);

/// Lower Cholesky factor C of M + jitter*I with its log-determinant.
class SpdFactor {
public:
  const Matrix& lower() const noexcept { return lower_; }
  double log_det() const noexcept { return log_det_; }
  double jitter() const noexcept { return jitter_; }
  bool jittered() const noexcept { return jitter_ > 0.0; }
  Index size() const noexcept { return lower_.rows(); }

  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  /// C^{-1} b
  Vector solve_lower(const Vector& b) const;
  /// C'^{-1} b; maps N(0, I) to N(0, M^{-1}).
  Vector solve_upper(const Vector& b) const;

private:
  friend SpdFactor chol_spd(const Matrix& m, double jitter);

  Matrix lower_;
  double log_det_ = 0.0;
  double jitter_ = 0.0;
};

SpdFactor chol_spd(const Matrix& m, double jitter = 0.0);
Vector solve_spd(const SpdFactor& factor, const Vector& b);
Matrix solve_spd(const SpdFactor& factor, const Matrix& b);

/// M = vectors * diag(values) * vectors', eigenvalues ascending.
struct SymmetricSpectrum {
  Matrix vectors;
  Vector values;
};

SymmetricSpectrum spectral_decomposition(const Matrix& m);

/// Flip column signs so that each column's first entry with magnitude above
/// `tol` is positive.
void canonicalize_column_signs(Matrix& m, double tol = 1e-10);

double max_asymmetry(const Matrix& m);

} // namespace rsr
