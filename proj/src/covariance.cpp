#include "rsr/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Cholesky>

#include "rsr/error.hpp"

namespace rsr {

namespace {

constexpr double kSiteTol = 1e-9;

void check_sites(const Vector& sites) {
  if (!sites.allFinite()) throw Error(Errc::NonFinite, "site coordinates contain non-finite values");
}

void check_adjacency(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(Errc::DimensionError, "adjacency must be square");
  if (!a.allFinite()) throw Error(Errc::NonFinite, "adjacency contains non-finite values");
  if (max_asymmetry(a) > 1e-12) throw Error(Errc::DimensionError, "adjacency must be symmetric");
  if (a.diagonal().cwiseAbs().maxCoeff() > 0.0) throw Error(Errc::DimensionError, "adjacency must have a zero diagonal");
}

Matrix select_rows(const Matrix& m, const std::vector<Index>& idx) {
  Matrix out(static_cast<Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = m.row(idx[i]);
  return out;
}

Matrix select_block(const Matrix& m, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(static_cast<Index>(i), static_cast<Index>(j)) = m(rows[i], cols[j]);
  return out;
}

// Knot span index for the clamped cubic knot vector (NURBS book A2.1).
Index find_span(Index last, double u, const std::vector<double>& knots) {
  constexpr Index degree = 3;
  if (u >= knots[static_cast<std::size_t>(last + 1)]) return last;
  Index low = degree;
  Index high = last + 1;
  Index mid = (low + high) / 2;
  while (u < knots[static_cast<std::size_t>(mid)] || u >= knots[static_cast<std::size_t>(mid + 1)]) {
    if (u < knots[static_cast<std::size_t>(mid)]) high = mid;
    else low = mid;
    mid = (low + high) / 2;
  }
  return mid;
}

} // namespace

std::string_view to_string(CovarianceKind kind) noexcept {
  switch (kind) {
    case CovarianceKind::Exponential: return "exponential";
    case CovarianceKind::Car: return "car";
    case CovarianceKind::BsplineLowRank: return "bspline";
    case CovarianceKind::MoranBasis: return "moran";
    case CovarianceKind::Fixed: return "fixed";
  }
  return "unknown";
}

CovarianceModel CovarianceModel::exponential(double nugget) {
  if (!(nugget >= 0.0) || !std::isfinite(nugget)) throw Error(Errc::InvalidHyperparameter, "nugget must be nonnegative");
  CovarianceModel m;
  m.kind_ = CovarianceKind::Exponential;
  m.jitter_ = nugget;
  return m;
}

CovarianceModel CovarianceModel::car(Matrix adjacency, Vector sites) {
  check_adjacency(adjacency);
  check_sites(sites);
  if (adjacency.rows() != sites.size()) throw Error(Errc::DimensionError, "adjacency and site count disagree");
  CovarianceModel m;
  m.kind_ = CovarianceKind::Car;
  m.adjacency_ = std::move(adjacency);
  m.sites_ = std::move(sites);
  return m;
}

CovarianceModel CovarianceModel::car_chain(const Vector& sites) { return car(chain_adjacency(sites), sites); }

CovarianceModel CovarianceModel::bspline(int rank, double rho) {
  if (rank < 4) throw Error(Errc::InvalidRank, "cubic B-splines need at least 4 basis functions");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw Error(Errc::InvalidHyperparameter, "rho must be nonnegative");
  CovarianceModel m;
  m.kind_ = CovarianceKind::BsplineLowRank;
  m.rank_ = rank;
  m.jitter_ = rho;
  return m;
}

CovarianceModel CovarianceModel::moran(const Matrix& adjacency, const ProjectionCache& proj, int rank, Vector sites,
                                       double rho) {
  check_sites(sites);
  if (sites.size() != proj.rows()) throw Error(Errc::DimensionError, "Moran sites must match the design rows");
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw Error(Errc::InvalidHyperparameter, "rho must be nonnegative");
  CovarianceModel m;
  m.kind_ = CovarianceKind::MoranBasis;
  m.basis_ = moran_basis(adjacency, proj, rank);
  m.rank_ = rank;
  m.jitter_ = rho;
  m.sites_ = std::move(sites);
  return m;
}

CovarianceModel CovarianceModel::fixed(Matrix sigma, Vector sites) {
  check_sites(sites);
  if (sigma.rows() != sigma.cols() || sigma.rows() != sites.size()) {
    throw Error(Errc::DimensionError, "fixed covariance must be square and match the site count");
  }
  if (!sigma.allFinite()) throw Error(Errc::NonFinite, "fixed covariance contains non-finite values");
  if (max_asymmetry(sigma) > 1e-10 * std::max(1.0, sigma.cwiseAbs().maxCoeff())) {
    throw Error(Errc::DimensionError, "fixed covariance must be symmetric");
  }
  CovarianceModel m;
  m.kind_ = CovarianceKind::Fixed;
  m.fixed_ = std::move(sigma);
  m.sites_ = std::move(sites);
  return m;
}

void CovarianceModel::check_gamma(std::optional<double> gamma) const {
  if (!uses_gamma()) return;
  if (!gamma) throw Error(Errc::InvalidHyperparameter, std::string(to_string(kind_)) + " covariance needs gamma");
  const double g = *gamma;
  if (kind_ == CovarianceKind::Exponential) {
    if (!(g > 0.0) || !std::isfinite(g)) throw Error(Errc::InvalidHyperparameter, "exponential range must be positive");
    return;
  }
  if (g == 1.0) throw Error(Errc::SingularCovariance, "CAR with gamma = 1 is improper");
  if (!(g > 0.0 && g < 1.0)) throw Error(Errc::InvalidHyperparameter, "CAR gamma must lie in (0, 1)");
}

std::vector<Index> CovarianceModel::lookup(const Vector& query) const {
  std::vector<Index> order(static_cast<std::size_t>(sites_.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return sites_[a] < sites_[b]; });

  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(query.size()));
  for (Index i = 0; i < query.size(); ++i) {
    const double q = query[i];
    auto it = std::lower_bound(order.begin(), order.end(), q - kSiteTol,
                               [&](Index a, double v) { return sites_[a] < v; });
    if (it == order.end() || std::abs(sites_[*it] - q) > kSiteTol) {
      throw Error(Errc::DimensionError, "site " + std::to_string(q) + " is not part of the covariance model");
    }
    out.push_back(*it);
  }
  return out;
}

Matrix CovarianceModel::car_full(double gamma) const {
  const Vector degree = adjacency_.rowwise().sum();
  if ((degree.array() <= 0.0).any()) throw Error(Errc::SingularCovariance, "CAR graph has an isolated site");
  Matrix precision = -gamma * adjacency_;
  precision.diagonal() += degree;
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) throw Error(Errc::SingularCovariance, "CAR precision is not positive definite");
  Matrix sigma = llt.solve(Matrix::Identity(precision.rows(), precision.cols()));
  return 0.5 * (sigma + sigma.transpose());
}

Matrix CovarianceModel::cross(std::optional<double> gamma, const Vector& a, const Vector& b) const {
  check_sites(a);
  check_sites(b);
  check_gamma(gamma);
  switch (kind_) {
    case CovarianceKind::Exponential: {
      Matrix out(a.size(), b.size());
      for (Index i = 0; i < a.size(); ++i)
        for (Index j = 0; j < b.size(); ++j) out(i, j) = std::exp(-std::abs(a[i] - b[j]) / *gamma);
      return out;
    }
    case CovarianceKind::Car:
      return select_block(car_full(*gamma), lookup(a), lookup(b));
    case CovarianceKind::BsplineLowRank:
      return bspline_basis(a, rank_) * bspline_basis(b, rank_).transpose();
    case CovarianceKind::MoranBasis:
      return select_rows(basis_, lookup(a)) * select_rows(basis_, lookup(b)).transpose();
    case CovarianceKind::Fixed:
      return select_block(fixed_, lookup(a), lookup(b));
  }
  throw Error(Errc::FamilyMismatch, "unknown covariance family");
}

Matrix CovarianceModel::marginal(std::optional<double> gamma, const Vector& a) const {
  Matrix out = cross(gamma, a, a);
  out = 0.5 * (out + out.transpose());
  out.diagonal().array() += jitter_;
  return out;
}

Matrix build_sigma_g(const CovarianceModel& model, std::optional<double> gamma, const Vector& sites) {
  return model.marginal(gamma, sites);
}

Matrix bspline_basis(const Vector& sites, int r) {
  if (r < 4) throw Error(Errc::InvalidRank, "cubic B-splines need at least 4 basis functions");
  check_sites(sites);
  constexpr int degree = 3;
  const int intervals = r - degree;
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(r + degree + 1));
  for (int i = 0; i <= degree; ++i) knots.push_back(0.0);
  for (int i = 1; i < intervals; ++i) knots.push_back(static_cast<double>(i) / intervals);
  for (int i = 0; i <= degree; ++i) knots.push_back(1.0);

  Matrix s = Matrix::Zero(sites.size(), r);
  for (Index row = 0; row < sites.size(); ++row) {
    const double u = sites[row];
    if (u < 0.0 || u > 1.0) throw Error(Errc::DimensionError, "B-spline sites must lie in [0, 1]");
    const Index span = find_span(r - 1, u, knots);
    // NURBS book A2.2
    double n[degree + 1];
    double left[degree + 1];
    double right[degree + 1];
    n[0] = 1.0;
    for (int j = 1; j <= degree; ++j) {
      left[j] = u - knots[static_cast<std::size_t>(span + 1 - j)];
      right[j] = knots[static_cast<std::size_t>(span + j)] - u;
      double saved = 0.0;
      for (int k = 0; k < j; ++k) {
        const double temp = n[k] / (right[k + 1] + left[j - k]);
        n[k] = saved + right[k + 1] * temp;
        saved = left[j - k] * temp;
      }
      n[j] = saved;
    }
    for (int j = 0; j <= degree; ++j) s(row, span - degree + j) = n[j];
  }
  return s;
}

Matrix moran_basis(const Matrix& adjacency, const ProjectionCache& proj, int r) {
  check_adjacency(adjacency);
  if (adjacency.rows() != proj.rows()) throw Error(Errc::DimensionError, "adjacency must match the design rows");
  const Index dim = proj.rows() - proj.cols();
  if (r < 1) throw Error(Errc::InvalidRank, "Moran rank must be at least 1");
  if (r > dim) throw Error(Errc::RankTooLarge, "Moran rank exceeds n - p");

  const Matrix& l = proj.complement();
  const SymmetricSpectrum spec = spectral_decomposition(l.transpose() * adjacency * l);
  const double scale = std::max(1.0, adjacency.cwiseAbs().maxCoeff());
  if (spec.values.cwiseAbs().maxCoeff() <= 1e-12 * scale) {
    throw Error(Errc::DegenerateOperator, "Moran operator is zero; eigenvector ordering is undefined");
  }
  Matrix phi(proj.rows(), r);
  for (int j = 0; j < r; ++j) phi.col(j) = l * spec.vectors.col(dim - 1 - j);
  canonicalize_column_signs(phi);
  return phi;
}

Matrix chain_adjacency(const Vector& sites) {
  check_sites(sites);
  const Index n = sites.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return sites[a] < sites[b]; });
  Matrix a = Matrix::Zero(n, n);
  for (std::size_t k = 1; k < order.size(); ++k) {
    a(order[k - 1], order[k]) = 1.0;
    a(order[k], order[k - 1]) = 1.0;
  }
  return a;
}

KrigingBlocks kriging_blocks(const CovarianceModel& model, std::optional<double> gamma, const Vector& obs_sites,
                             const Vector& miss_sites) {
  if (miss_sites.size() == 0) {
    return {Matrix(0, obs_sites.size()), Matrix(0, 0)};
  }
  if (model.kind() == CovarianceKind::MoranBasis) {
    throw Error(Errc::FamilyMismatch, "the Moran basis is defined on the fitted sites only and cannot krige");
  }
  return {model.cross(gamma, miss_sites, obs_sites), model.marginal(gamma, miss_sites)};
}

} // namespace rsr
