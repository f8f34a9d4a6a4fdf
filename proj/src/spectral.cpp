#include "rsr/spectral.hpp"

#include <iostream>

#include "rsr/error.hpp"
#include "rsr/parallel.hpp"

namespace rsr {

CovarianceSpectrum covariance_spectrum(const CovarianceModel& model, std::optional<double> gamma,
                                       const SpatialDataset& data) {
  CovarianceSpectrum s;
  s.gamma = gamma;
  Matrix sigma;
  try {
    sigma = model.marginal(gamma, data.obs_sites);
  } catch (const Error& e) {
    if (e.code() != Errc::SingularCovariance) throw;
    s.failure = e.what();
    return s;
  }
  SymmetricSpectrum eig = spectral_decomposition(sigma);
  const double top = eig.values.maxCoeff();
  if (!(top > 0.0) || eig.values.minCoeff() <= 1e-12 * top) {
    s.failure = "SingularCovariance: Sigma_g is singular or indefinite";
    return s;
  }
  s.u = std::move(eig.vectors);
  s.lambda = std::move(eig.values);
  s.log_det = s.lambda.array().log().sum();
  const KrigingBlocks blocks = kriging_blocks(model, gamma, data.obs_sites, data.miss_sites);
  s.cross_u = blocks.sigma_cross * s.u;
  s.sigma_m = blocks.sigma_m;
  s.valid = true;
  return s;
}

SpectralFamily spectral_family(const CovarianceModel& model, const HyperGrid& grid, const SpatialDataset& data,
                               int threads) {
  SpectralFamily fam;
  std::vector<std::optional<double>> gammas;
  fam.point_spectrum.reserve(grid.size());
  for (const GridPoint& pt : grid.points()) {
    const std::optional<double> key = model.uses_gamma() ? pt.gamma : std::nullopt;
    std::size_t idx = gammas.size();
    for (std::size_t j = 0; j < gammas.size(); ++j) {
      if (gammas[j] == key) {
        idx = j;
        break;
      }
    }
    if (idx == gammas.size()) gammas.push_back(key);
    fam.point_spectrum.push_back(idx);
  }

  fam.spectra.resize(gammas.size());
  parallel_for(gammas.size(), threads,
               [&](std::size_t j) { fam.spectra[j] = covariance_spectrum(model, gammas[j], data); });
  for (const auto& s : fam.spectra) {
    if (s.valid) continue;
    std::cerr << "warning: grid points";
    if (s.gamma) std::cerr << " with gamma=" << *s.gamma;
    std::cerr << " get zero weight (" << s.failure << ")\n";
  }
  return fam;
}

} // namespace rsr
