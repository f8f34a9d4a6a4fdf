#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "rsr/covariance.hpp"
#include "rsr/model.hpp"
#include "rsr/rng.hpp"
#include "rsr/spectral.hpp"

namespace rsr {

struct GibbsState {
  Vector beta;
  Vector g;
  double sigma2 = 1.0;
  std::size_t grid_index = 0;
  std::size_t iteration = 0;
};

/// Full conditionals of the confounded model
///   y = X beta + g + eps,  g ~ N(0, tau2 sigma2 Sigma_g),  sigma2 ~ IG(alpha, kappa),
/// with (tau2, gamma) uniform on the grid. Sigma_g is handled through its
/// eigenbasis, shared by every tau2 with the same gamma.
class GibbsSampler {
public:
  /// `data` is held by reference and must outlive the sampler.
  GibbsSampler(const SpatialDataset& data, const CovarianceModel& model, const PriorSpec& prior, int threads = 1);

  /// beta = OLS, g = 0, sigma2 = residual variance (divisor n - p), median tau2.
  GibbsState initial_state() const;

  Vector draw_beta(const GibbsState& s, Rng& rng) const;
  Vector draw_g(const GibbsState& s, Rng& rng) const;
  double draw_sigma2(const GibbsState& s, Rng& rng) const;
  std::size_t draw_grid_point(const GibbsState& s, Rng& rng) const;
  /// One sweep in the order beta, g, sigma2, (tau2, gamma).
  void sweep(GibbsState& s, Rng& rng) const;

  Vector beta_mean(const GibbsState& s) const;
  Vector g_mean(const GibbsState& s) const;
  Matrix g_covariance(const GibbsState& s) const;
  double sigma2_shape() const;
  double sigma2_rate(const GibbsState& s) const;
  /// Unnormalized log f(g | tau2_k, gamma_k, sigma2); -inf at singular points.
  std::vector<double> grid_log_weights(const GibbsState& s) const;

  double tau2(const GibbsState& s) const { return prior_.grid[s.grid_index].tau2; }
  HyperParams theta(const GibbsState& s) const;
  const ProjectionCache& projection() const noexcept { return proj_; }
  const CovarianceSpectrum& spectrum(const GibbsState& s) const;

private:
  Vector shrinkage(const GibbsState& s) const;

  const SpatialDataset& data_;
  PriorSpec prior_;
  ProjectionCache proj_;
  SpectralFamily family_;
};

struct GibbsOptions {
  std::size_t iters = 2000;
  std::size_t burn_in = 1000;
  std::size_t thin = 10;
  int threads = 1;
};

struct GibbsResult {
  std::vector<PosteriorDraw> draws;
  double seconds = 0.0;
};

/// Kept draws are iterations burn_in+thin, burn_in+2*thin, ..., each with
/// delta = lram_forward(beta, g) and a predictive y_m.
GibbsResult run_gibbs(const SpatialDataset& data, const CovarianceModel& model, const PriorSpec& prior,
                      const GibbsOptions& options, const Rng& rng);

std::size_t gibbs_kept_draws(const GibbsOptions& options);

} // namespace rsr
