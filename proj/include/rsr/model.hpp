#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rsr/linalg.hpp"

namespace rsr {

/// Observed responses with their covariates plus the sites to predict.
struct SpatialDataset {
  Vector y_obs;
  Matrix x_obs;
  Vector obs_sites;
  Vector miss_sites;
  Matrix x_miss;

  Index n_obs() const noexcept { return y_obs.size(); }
  Index n_miss() const noexcept { return miss_sites.size(); }
  Index p() const noexcept { return x_obs.cols(); }
};

/// Checks shapes and finiteness and that X is usable (full column rank,
/// n_o > p). Throws ShapeMismatch, NonFinite, RankDeficient or DimensionError.
SpatialDataset validate_dataset(Vector y_obs, Matrix x_obs, Vector obs_sites, Vector miss_sites, Matrix x_miss);

struct HyperParams {
  double sigma2 = 1.0;
  double tau2 = 1.0;
  std::optional<double> gamma;
};

struct GridPoint {
  double tau2 = 1.0;
  std::optional<double> gamma;
};

/// Discrete uniform support for (tau2, gamma). Points are stored tau2-major.
class HyperGrid {
public:
  HyperGrid() = default;
  explicit HyperGrid(std::vector<GridPoint> points);

  /// K equally spaced tau2 values on [lo, hi] crossed with `gammas`
  /// (an empty list means the family has no gamma).
  static HyperGrid tau2_range(double lo, double hi, std::size_t k, const std::vector<double>& gammas = {});

  const std::vector<GridPoint>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const GridPoint& operator[](std::size_t k) const { return points_[k]; }
  /// Index of the point with the median tau2 (lower median).
  std::size_t median_index() const;

private:
  std::vector<GridPoint> points_;
};

struct PriorSpec {
  double alpha = 1.0;
  double kappa = 1.0;
  HyperGrid grid;

  void validate() const;
};

/// delta = beta + (X'X)^{-1} X' g
Vector lram_forward(const Vector& beta, const Vector& g, const ProjectionCache& proj);
/// beta = delta - (X'X)^{-1} X' g
Vector lram_inverse(const Vector& delta, const Vector& g, const ProjectionCache& proj);

/// One joint replicate. beta, delta and g always satisfy the LRAM identity.
struct PosteriorDraw {
  Vector delta;
  Vector g;
  Vector beta;
  HyperParams theta;
  Vector y_miss;

  static PosteriorDraw from_deconfounded(Vector delta, Vector g, const ProjectionCache& proj, HyperParams theta,
                                         Vector y_miss = {});
  static PosteriorDraw from_confounded(Vector beta, Vector g, const ProjectionCache& proj, HyperParams theta,
                                       Vector y_miss = {});
};

} // namespace rsr
