#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "rsr/covariance.hpp"
#include "rsr/model.hpp"
#include "rsr/rng.hpp"
#include "rsr/spectral.hpp"

namespace rsr {

/// Per grid point state for the direct sampler.
///
/// With Sigma_g = U diag(lambda) U' and D = diag(tau2*lambda / (1 + tau2*lambda)),
/// M = (I-P) + Sigma_g^{-1}/tau2 = U (D^{-1} - U'Q Q'U) U'. Everything about M
/// reduces to the p x p Schur complement S = I - (U'Q)' D (U'Q).
struct GridPointCache {
  double tau2 = 0.0;
  std::optional<double> gamma;
  std::size_t spectrum = 0;
  bool valid = false;
  double kappa_star = 0.0;
  double log_weight = 0.0;
  Matrix schur_lower; ///< Cholesky factor of S
  Vector schur_v;     ///< S^{-1} (U'Q)' D U'(I-P)y
};

class GridCache {
public:
  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<GridPointCache>& points() const noexcept { return points_; }
  /// Normalized posterior probabilities over the grid (zero at invalid points).
  const std::vector<double>& probabilities() const noexcept { return probs_; }
  double alpha_star() const noexcept { return alpha_star_; }
  const CovarianceSpectrum& spectrum_of(std::size_t k) const { return family_.spectra[points_[k].spectrum]; }
  const SpectralFamily& family() const noexcept { return family_; }
  std::size_t modal_index() const;

  /// Draw from N(M^{-1}(I-P)y, sigma2 M^{-1}) at grid point k.
  Vector sample_g(std::size_t k, double sigma2, Rng& rng) const;
  /// M^{-1}(I-P)y
  Vector g_mean(std::size_t k) const;
  /// sigma2 M^{-1}, dense; for diagnostics and tests.
  Matrix g_covariance(std::size_t k, double sigma2) const;

private:
  friend GridCache precompute_grid(const SpatialDataset&, const ProjectionCache&, const CovarianceModel&,
                                   const PriorSpec&, int);

  Vector shrinkage(std::size_t k) const;

  SpectralFamily family_;
  std::vector<Matrix> utq_;
  std::vector<Vector> utr_;
  std::vector<GridPointCache> points_;
  std::vector<double> probs_;
  double alpha_star_ = 0.0;
};

/// Marginal posterior of (tau2, gamma) on the grid. Points whose Sigma_g is
/// singular get weight zero and a warning on stderr; if none survive this
/// throws SingularCovariance.
GridCache precompute_grid(const SpatialDataset& data, const ProjectionCache& proj, const CovarianceModel& model,
                          const PriorSpec& prior, int threads = 1);

struct HyperDraw {
  std::size_t index = 0;
  HyperParams theta;
};

/// Grid point from the normalized weights, then sigma2 ~ IG(alpha*, kappa*_k).
HyperDraw sample_hyper(const GridCache& cache, Rng& rng);

/// Dense route: builds and factors M explicitly.
Vector sample_g(const SpatialDataset& data, const CovarianceModel& model, const HyperParams& theta, Rng& rng);

/// delta ~ N((X'X)^{-1}X'y, sigma2 (X'X)^{-1}). Takes no covariance input.
Vector sample_delta(const ProjectionCache& proj, const Vector& y, double sigma2, Rng& rng);
Vector sample_delta(const SpatialDataset& data, double sigma2, Rng& rng);

struct GlsResult {
  Vector mean;
  Matrix cov;
};

/// Posterior of beta given theta with Sigma_Y = tau2*sigma2*Sigma_g + sigma2*I.
GlsResult gls_closed_form(const SpatialDataset& data, const CovarianceModel& model, const HyperParams& theta);

enum class TestDecision { AcceptNull, RejectNull };

struct TestResult {
  double posterior_prob_h0 = 0.0;
  TestDecision decision = TestDecision::RejectNull;
  double half_width = 0.25;
};

/// c = (X'X)^{-1}X'g per draw (rows of g_draws); H0 holds in a draw when
/// every |c_i| < a. Accepts iff the proportion exceeds one half.
TestResult hypothesis_test(const Matrix& g_draws, const ProjectionCache& proj, double a = 0.25);

struct GrsrOptions {
  std::size_t draws = 100;
  double test_half_width = 0.25;
  /// Run the g and delta steps of each draw on separate threads.
  bool concurrent_steps = false;
  int threads = 1;
};

struct GrsrResult {
  std::vector<PosteriorDraw> draws;
  TestResult test;
  GridPoint modal_point;
  double seconds = 0.0;
};

/// Independent joint draws; draw b uses rng.split(b) so results do not depend
/// on thread count or on whether the g and delta steps overlap.
GrsrResult run_grsr(const SpatialDataset& data, const CovarianceModel& model, const PriorSpec& prior,
                    const GrsrOptions& options, const Rng& rng);

} // namespace rsr
