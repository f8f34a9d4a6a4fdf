#include "rsr/gibbs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "rsr/error.hpp"
#include "rsr/kriging.hpp"

namespace rsr {

GibbsSampler::GibbsSampler(const SpatialDataset& data, const CovarianceModel& model, const PriorSpec& prior,
                           int threads)
    : data_(data), prior_(prior), proj_(data.x_obs) {
  prior_.validate();
  family_ = spectral_family(model, prior_.grid, data_, threads);
  const bool any_valid =
      std::any_of(family_.spectra.begin(), family_.spectra.end(), [](const auto& s) { return s.valid; });
  if (!any_valid) throw Error(Errc::SingularCovariance, "every grid point has a singular covariance");
}

const CovarianceSpectrum& GibbsSampler::spectrum(const GibbsState& s) const {
  return family_.spectra[family_.point_spectrum.at(s.grid_index)];
}

HyperParams GibbsSampler::theta(const GibbsState& s) const {
  const GridPoint& pt = prior_.grid[s.grid_index];
  return {s.sigma2, pt.tau2, pt.gamma};
}

GibbsState GibbsSampler::initial_state() const {
  GibbsState s;
  s.beta = proj_.coefficients(data_.y_obs);
  s.g = Vector::Zero(data_.n_obs());
  const double dof = static_cast<double>(data_.n_obs() - data_.p());
  s.sigma2 = std::max(proj_.residual(data_.y_obs).squaredNorm() / dof, 1e-8);

  // median tau2 among points whose covariance is usable
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < prior_.grid.size(); ++k)
    if (family_.spectra[family_.point_spectrum[k]].valid) idx.push_back(k);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return prior_.grid[a].tau2 < prior_.grid[b].tau2; });
  s.grid_index = idx[(idx.size() - 1) / 2];
  return s;
}

Vector GibbsSampler::shrinkage(const GibbsState& s) const {
  const double t = tau2(s);
  const Vector& lambda = spectrum(s).lambda;
  return (t * lambda.array() / (1.0 + t * lambda.array())).matrix();
}

Vector GibbsSampler::beta_mean(const GibbsState& s) const { return proj_.coefficients(data_.y_obs - s.g); }

Vector GibbsSampler::draw_beta(const GibbsState& s, Rng& rng) const {
  return beta_mean(s) + std::sqrt(s.sigma2) * proj_.solve_r(rng.normal_vector(proj_.cols()));
}

Vector GibbsSampler::g_mean(const GibbsState& s) const {
  const Matrix& u = spectrum(s).u;
  return u * shrinkage(s).cwiseProduct(u.transpose() * (data_.y_obs - data_.x_obs * s.beta));
}

Matrix GibbsSampler::g_covariance(const GibbsState& s) const {
  const Matrix& u = spectrum(s).u;
  return s.sigma2 * (u * shrinkage(s).asDiagonal() * u.transpose());
}

Vector GibbsSampler::draw_g(const GibbsState& s, Rng& rng) const {
  const Matrix& u = spectrum(s).u;
  const Vector d = shrinkage(s);
  const Vector rot = d.cwiseProduct(u.transpose() * (data_.y_obs - data_.x_obs * s.beta));
  const Vector z = rng.normal_vector(d.size());
  return u * (rot + std::sqrt(s.sigma2) * d.cwiseSqrt().cwiseProduct(z));
}

double GibbsSampler::sigma2_shape() const { return prior_.alpha + static_cast<double>(data_.n_obs()); }

double GibbsSampler::sigma2_rate(const GibbsState& s) const {
  const CovarianceSpectrum& spec = spectrum(s);
  const Vector rot = spec.u.transpose() * s.g;
  const double prior_quad = rot.cwiseProduct(rot).cwiseQuotient(spec.lambda).sum();
  const double resid = (data_.y_obs - data_.x_obs * s.beta - s.g).squaredNorm();
  return prior_.kappa + prior_quad / (2.0 * tau2(s)) + 0.5 * resid;
}

double GibbsSampler::draw_sigma2(const GibbsState& s, Rng& rng) const {
  return rng.inverse_gamma(sigma2_shape(), sigma2_rate(s));
}

std::vector<double> GibbsSampler::grid_log_weights(const GibbsState& s) const {
  const double n = static_cast<double>(data_.n_obs());
  std::vector<double> quad(family_.spectra.size(), 0.0);
  for (std::size_t j = 0; j < family_.spectra.size(); ++j) {
    const CovarianceSpectrum& spec = family_.spectra[j];
    if (!spec.valid) continue;
    const Vector rot = spec.u.transpose() * s.g;
    quad[j] = rot.cwiseProduct(rot).cwiseQuotient(spec.lambda).sum();
  }
  std::vector<double> out(prior_.grid.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const std::size_t j = family_.point_spectrum[k];
    const CovarianceSpectrum& spec = family_.spectra[j];
    if (!spec.valid) {
      out[k] = -std::numeric_limits<double>::infinity();
      continue;
    }
    const double scale = prior_.grid[k].tau2 * s.sigma2;
    out[k] = -0.5 * n * std::log(scale) - 0.5 * spec.log_det - quad[j] / (2.0 * scale);
  }
  return out;
}

std::size_t GibbsSampler::draw_grid_point(const GibbsState& s, Rng& rng) const {
  std::vector<double> w = grid_log_weights(s);
  const double top = *std::max_element(w.begin(), w.end());
  for (double& v : w) v = std::exp(v - top);
  return rng.categorical(w);
}

void GibbsSampler::sweep(GibbsState& s, Rng& rng) const {
  s.beta = draw_beta(s, rng);
  s.g = draw_g(s, rng);
  s.sigma2 = draw_sigma2(s, rng);
  s.grid_index = draw_grid_point(s, rng);
  ++s.iteration;
}

std::size_t gibbs_kept_draws(const GibbsOptions& options) {
  if (options.thin < 1) throw Error(Errc::InvalidHyperparameter, "thin must be at least 1");
  if (options.iters <= options.burn_in) throw Error(Errc::InvalidHyperparameter, "iters must exceed burn_in");
  return (options.iters - options.burn_in) / options.thin;
}

GibbsResult run_gibbs(const SpatialDataset& data, const CovarianceModel& model, const PriorSpec& prior,
                      const GibbsOptions& options, const Rng& rng) {
  const std::size_t kept = gibbs_kept_draws(options);
  const auto start = std::chrono::steady_clock::now();
  const GibbsSampler sampler(data, model, prior, options.threads);
  Rng chain = rng.split(0);
  Rng predictive = rng.split(1);

  GibbsResult out;
  out.draws.reserve(kept);
  GibbsState state = sampler.initial_state();
  for (std::size_t it = 1; it <= options.iters; ++it) {
    sampler.sweep(state, chain);
    if (it <= options.burn_in || (it - options.burn_in) % options.thin != 0) continue;
    const HyperParams theta = sampler.theta(state);
    PosteriorDraw draw = PosteriorDraw::from_confounded(state.beta, state.g, sampler.projection(), theta);
    draw.y_miss = data.n_miss() > 0
                      ? draw_gaussian(kriging_moments(data, sampler.spectrum(state), state.beta, theta), predictive)
                      : Vector(0);
    out.draws.push_back(std::move(draw));
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

} // namespace rsr
