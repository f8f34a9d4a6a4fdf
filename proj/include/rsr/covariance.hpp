#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "rsr/linalg.hpp"

namespace rsr {

enum class CovarianceKind { Exponential, Car, BsplineLowRank, MoranBasis, Fixed };

std::string_view to_string(CovarianceKind kind) noexcept;

/// Spatial covariance Sigma_g(gamma) for 1-D sites.
///
/// Every family has unit scale; the sampler multiplies by tau2*sigma2.
/// Families defined on a fixed site set (CAR, MoranBasis, Fixed) look sites up
/// by coordinate, so any site passed in must be one of `sites()`.
///
/// The declared jitter (exponential nugget, rho for the low-rank families) is
/// added on the diagonal of same-set blocks only; cross blocks never see it.
class CovarianceModel {
public:
  static CovarianceModel exponential(double nugget = 0.0);
  /// Proper CAR: (D - gamma*A)^{-1} over `sites`.
  static CovarianceModel car(Matrix adjacency, Vector sites);
  /// CAR over 1-D sites with immediate neighbours adjacent (after sorting).
  static CovarianceModel car_chain(const Vector& sites);
  static CovarianceModel bspline(int rank, double rho = 0.01);
  /// Phi Phi' + rho*I with Phi the Moran basis of (I-P)A(I-P) on `sites`.
  static CovarianceModel moran(const Matrix& adjacency, const ProjectionCache& proj, int rank, Vector sites,
                               double rho = 0.01);
  /// A user-supplied Sigma_g over `sites`, no hyperparameter.
  static CovarianceModel fixed(Matrix sigma, Vector sites);

  CovarianceKind kind() const noexcept { return kind_; }
  bool uses_gamma() const noexcept { return kind_ == CovarianceKind::Exponential || kind_ == CovarianceKind::Car; }
  /// The diagonal jitter added to marginal blocks.
  double jitter() const noexcept { return jitter_; }
  int rank() const noexcept { return rank_; }
  const Vector& sites() const noexcept { return sites_; }
  const Matrix& basis() const noexcept { return basis_; }

  void check_gamma(std::optional<double> gamma) const;

  /// cov(g(a), g(b)) without jitter.
  Matrix cross(std::optional<double> gamma, const Vector& a, const Vector& b) const;
  /// cov(g(a)) including the declared jitter.
  Matrix marginal(std::optional<double> gamma, const Vector& a) const;

private:
  CovarianceModel() = default;

  std::vector<Index> lookup(const Vector& query) const;
  Matrix car_full(double gamma) const;

  CovarianceKind kind_ = CovarianceKind::Exponential;
  double jitter_ = 0.0;
  int rank_ = 0;
  Vector sites_;
  Matrix adjacency_;
  Matrix basis_;
  Matrix fixed_;
};

Matrix build_sigma_g(const CovarianceModel& model, std::optional<double> gamma, const Vector& sites);

/// Clamped cubic B-spline design, `r` functions, equally spaced knots on [0,1].
Matrix bspline_basis(const Vector& sites, int r);

/// Leading `r` eigenvectors of (I-P)A(I-P) restricted to the complement of
/// col(X), in decreasing eigenvalue order.
Matrix moran_basis(const Matrix& adjacency, const ProjectionCache& proj, int r);

/// 0/1 adjacency joining each site to its immediate neighbours in sorted order.
Matrix chain_adjacency(const Vector& sites);

struct KrigingBlocks {
  Matrix sigma_cross; ///< n_m x n_o
  Matrix sigma_m;     ///< n_m x n_m
};

KrigingBlocks kriging_blocks(const CovarianceModel& model, std::optional<double> gamma, const Vector& obs_sites,
                             const Vector& miss_sites);

} // namespace rsr
