#include "rsr/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsr/error.hpp"

namespace rsr {

SpatialDataset validate_dataset(Vector y_obs, Matrix x_obs, Vector obs_sites, Vector miss_sites, Matrix x_miss) {
  if (x_obs.rows() != y_obs.size() || obs_sites.size() != y_obs.size()) {
    throw Error(Errc::ShapeMismatch, "observed y, X and sites must have the same number of rows");
  }
  if (x_miss.rows() != miss_sites.size()) throw Error(Errc::ShapeMismatch, "missing X and sites disagree in length");
  if (miss_sites.size() > 0 && x_miss.cols() != x_obs.cols()) {
    throw Error(Errc::ShapeMismatch, "missing X must have the same columns as observed X");
  }
  if (!y_obs.allFinite() || !x_obs.allFinite() || !obs_sites.allFinite() || !miss_sites.allFinite() ||
      !x_miss.allFinite()) {
    throw Error(Errc::NonFinite, "dataset contains non-finite values");
  }
  build_projection_cache(x_obs);

  SpatialDataset d;
  d.y_obs = std::move(y_obs);
  d.x_obs = std::move(x_obs);
  d.obs_sites = std::move(obs_sites);
  d.miss_sites = std::move(miss_sites);
  d.x_miss = d.miss_sites.size() > 0 ? std::move(x_miss) : Matrix(0, d.x_obs.cols());
  return d;
}

HyperGrid::HyperGrid(std::vector<GridPoint> points) : points_(std::move(points)) {
  for (const auto& pt : points_) {
    if (!(pt.tau2 > 0.0) || !std::isfinite(pt.tau2)) throw Error(Errc::InvalidHyperparameter, "grid tau2 must be positive");
  }
}

HyperGrid HyperGrid::tau2_range(double lo, double hi, std::size_t k, const std::vector<double>& gammas) {
  if (k == 0) throw Error(Errc::InvalidHyperparameter, "grid needs at least one tau2 value");
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    throw Error(Errc::InvalidHyperparameter, "tau2 range must satisfy 0 < lo <= hi");
  }
  std::vector<GridPoint> pts;
  pts.reserve(k * std::max<std::size_t>(1, gammas.size()));
  for (std::size_t i = 0; i < k; ++i) {
    const double t = k == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
    if (gammas.empty()) {
      pts.push_back({t, std::nullopt});
    } else {
      for (double g : gammas) pts.push_back({t, g});
    }
  }
  return HyperGrid(std::move(pts));
}

std::size_t HyperGrid::median_index() const {
  if (points_.empty()) throw Error(Errc::InvalidHyperparameter, "grid is empty");
  std::vector<std::size_t> idx(points_.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return points_[a].tau2 < points_[b].tau2; });
  return idx[(idx.size() - 1) / 2];
}

void PriorSpec::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(Errc::InvalidHyperparameter, "alpha must be positive");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw Error(Errc::InvalidHyperparameter, "kappa must be positive");
  if (grid.empty()) throw Error(Errc::InvalidHyperparameter, "hyperparameter grid is empty");
}

Vector lram_forward(const Vector& beta, const Vector& g, const ProjectionCache& proj) {
  if (beta.size() != proj.cols() || g.size() != proj.rows()) throw Error(Errc::DimensionError, "LRAM operand sizes");
  return beta + proj.coefficients(g);
}

Vector lram_inverse(const Vector& delta, const Vector& g, const ProjectionCache& proj) {
  if (delta.size() != proj.cols() || g.size() != proj.rows()) throw Error(Errc::DimensionError, "LRAM operand sizes");
  return delta - proj.coefficients(g);
}

PosteriorDraw PosteriorDraw::from_deconfounded(Vector delta, Vector g, const ProjectionCache& proj, HyperParams theta,
                                               Vector y_miss) {
  PosteriorDraw d;
  d.beta = lram_inverse(delta, g, proj);
  d.delta = std::move(delta);
  d.g = std::move(g);
  d.theta = theta;
  d.y_miss = std::move(y_miss);
  return d;
}

PosteriorDraw PosteriorDraw::from_confounded(Vector beta, Vector g, const ProjectionCache& proj, HyperParams theta,
                                             Vector y_miss) {
  PosteriorDraw d;
  d.delta = lram_forward(beta, g, proj);
  d.beta = std::move(beta);
  d.g = std::move(g);
  d.theta = theta;
  d.y_miss = std::move(y_miss);
  return d;
}

} // namespace rsr
