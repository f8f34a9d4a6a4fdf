#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rsr/covariance.hpp"
#include "rsr/model.hpp"

namespace rsr {

/// Sigma_g(gamma) on the observed sites as U diag(lambda) U', plus the
/// kriging blocks rotated into that basis. One of these serves every tau2
/// sharing the same gamma.
struct CovarianceSpectrum {
  std::optional<double> gamma;
  bool valid = false;
  std::string failure;
  Matrix u;
  Vector lambda;
  double log_det = 0.0;
  Matrix cross_u; ///< Sigma_cross U, n_m x n_o
  Matrix sigma_m; ///< n_m x n_m
};

/// Never throws SingularCovariance: a singular Sigma_g is reported through
/// `valid`/`failure` instead.
CovarianceSpectrum covariance_spectrum(const CovarianceModel& model, std::optional<double> gamma,
                                       const SpatialDataset& data);

struct SpectralFamily {
  std::vector<CovarianceSpectrum> spectra;
  std::vector<std::size_t> point_spectrum; ///< grid point -> spectra index
};

SpectralFamily spectral_family(const CovarianceModel& model, const HyperGrid& grid, const SpatialDataset& data,
                               int threads = 1);

} // namespace rsr
