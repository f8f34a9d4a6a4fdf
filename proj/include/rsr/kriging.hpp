#pragma once

#include "rsr/covariance.hpp"
#include "rsr/model.hpp"
#include "rsr/rng.hpp"
#include "rsr/spectral.hpp"

namespace rsr {

/// Conditional law of y_m given y_obs, beta and theta. The covariance
/// includes the new measurement noise sigma2*I_m.
struct KrigingMoments {
  Vector mean;
  Matrix cov;
};

/// Dense route: factors Sigma_Y = tau2*sigma2*Sigma_g + sigma2*I directly.
/// `blocks` are unscaled, as returned by kriging_blocks.
KrigingMoments kriging_moments(const SpatialDataset& data, const Matrix& sigma_g, const KrigingBlocks& blocks,
                               const Vector& beta, const HyperParams& theta);

/// Same law through the eigenbasis of Sigma_g.
KrigingMoments kriging_moments(const SpatialDataset& data, const CovarianceSpectrum& spectrum, const Vector& beta,
                               const HyperParams& theta);

/// Symmetrizes the covariance and retries once with 1e-10 jitter before
/// throwing NotPositiveDefinite.
Vector draw_gaussian(const KrigingMoments& moments, Rng& rng);

Vector sample_missing(const SpatialDataset& data, const Matrix& sigma_g, const KrigingBlocks& blocks,
                      const Vector& beta, const HyperParams& theta, Rng& rng);

} // namespace rsr
