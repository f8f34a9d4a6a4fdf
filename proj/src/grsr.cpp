#include "rsr/grsr.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>

#include <Eigen/Cholesky>

#include "rsr/error.hpp"
#include "rsr/kriging.hpp"
#include "rsr/parallel.hpp"

namespace rsr {

std::size_t GridCache::modal_index() const {
  return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

Vector GridCache::shrinkage(std::size_t k) const {
  const double t = points_[k].tau2;
  const Vector& lambda = spectrum_of(k).lambda;
  return (t * lambda.array() / (1.0 + t * lambda.array())).matrix();
}

Vector GridCache::g_mean(std::size_t k) const {
  const GridPointCache& pt = points_.at(k);
  if (!pt.valid) throw Error(Errc::SingularCovariance, "grid point has a singular covariance");
  const Vector d = shrinkage(k);
  const Matrix& utq = utq_[pt.spectrum];
  const Vector rot = d.cwiseProduct(utr_[pt.spectrum]) + d.cwiseProduct(utq * pt.schur_v);
  return spectrum_of(k).u * rot;
}

Matrix GridCache::g_covariance(std::size_t k, double sigma2) const {
  const GridPointCache& pt = points_.at(k);
  if (!pt.valid) throw Error(Errc::SingularCovariance, "grid point has a singular covariance");
  const Vector d = shrinkage(k);
  const Matrix& u = spectrum_of(k).u;
  const Matrix dq = d.asDiagonal() * utq_[pt.spectrum];
  const Matrix half = pt.schur_lower.triangularView<Eigen::Lower>().solve(dq.transpose());
  Matrix inner = half.transpose() * half;
  inner.diagonal() += d;
  return sigma2 * (u * inner * u.transpose());
}

Vector GridCache::sample_g(std::size_t k, double sigma2, Rng& rng) const {
  const GridPointCache& pt = points_.at(k);
  if (!pt.valid) throw Error(Errc::SingularCovariance, "grid point has a singular covariance");
  const Vector d = shrinkage(k);
  const Matrix& utq = utq_[pt.spectrum];
  const Index n = d.size();
  const Vector z1 = rng.normal_vector(n);
  const Vector z2 = rng.normal_vector(utq.cols());
  const Vector w = pt.schur_lower.transpose().triangularView<Eigen::Upper>().solve(z2);
  const Vector mean_rot = d.cwiseProduct(utr_[pt.spectrum] + utq * pt.schur_v);
  const Vector noise_rot = d.cwiseSqrt().cwiseProduct(z1) + d.cwiseProduct(utq * w);
  return spectrum_of(k).u * (mean_rot + std::sqrt(sigma2) * noise_rot);
}

GridCache precompute_grid(const SpatialDataset& data, const ProjectionCache& proj, const CovarianceModel& model,
                          const PriorSpec& prior, int threads) {
  prior.validate();
  if (proj.rows() != data.n_obs()) throw Error(Errc::DimensionError, "projection does not match the dataset");

  GridCache cache;
  cache.family_ = spectral_family(model, prior.grid, data, threads);
  const Vector r = proj.residual(data.y_obs);
  const double rr = r.squaredNorm();
  const Index p = proj.cols();
  cache.alpha_star_ = 0.5 * static_cast<double>(data.n_obs() - p) + prior.alpha;

  cache.utq_.resize(cache.family_.spectra.size());
  cache.utr_.resize(cache.family_.spectra.size());
  for (std::size_t s = 0; s < cache.family_.spectra.size(); ++s) {
    const CovarianceSpectrum& spec = cache.family_.spectra[s];
    if (!spec.valid) continue;
    cache.utq_[s] = spec.u.transpose() * proj.q();
    cache.utr_[s] = spec.u.transpose() * r;
  }

  const auto& grid = prior.grid.points();
  cache.points_.resize(grid.size());
  parallel_for(grid.size(), threads, [&](std::size_t k) {
    GridPointCache& pt = cache.points_[k];
    pt.tau2 = grid[k].tau2;
    pt.gamma = grid[k].gamma;
    pt.spectrum = cache.family_.point_spectrum[k];
    const CovarianceSpectrum& spec = cache.family_.spectra[pt.spectrum];
    if (!spec.valid) return;

    const double t = pt.tau2;
    const Vector d = (t * spec.lambda.array() / (1.0 + t * spec.lambda.array())).matrix();
    const Matrix& utq = cache.utq_[pt.spectrum];
    const Vector& utr = cache.utr_[pt.spectrum];
    Matrix schur = -(utq.transpose() * d.asDiagonal() * utq);
    schur.diagonal().array() += 1.0;
    Eigen::LLT<Matrix> llt(schur);
    if (llt.info() != Eigen::Success) return;
    pt.schur_lower = llt.matrixL();
    const Vector v = utq.transpose() * d.cwiseProduct(utr);
    pt.schur_v = llt.solve(v);

    const double quad = d.dot(utr.cwiseProduct(utr)) + v.dot(pt.schur_v);
    pt.kappa_star = 0.5 * rr - 0.5 * quad + prior.kappa;
    const double log_det_schur = 2.0 * pt.schur_lower.diagonal().array().log().sum();
    const double log_det_a = (t * spec.lambda.array()).log1p().sum();
    pt.log_weight = -0.5 * log_det_a - 0.5 * log_det_schur - cache.alpha_star_ * std::log(pt.kappa_star);
    pt.valid = pt.kappa_star > 0.0 && std::isfinite(pt.log_weight);
  });

  double top = -std::numeric_limits<double>::infinity();
  for (const auto& pt : cache.points_)
    if (pt.valid) top = std::max(top, pt.log_weight);
  if (!std::isfinite(top)) throw Error(Errc::SingularCovariance, "every grid point has a singular covariance");
  cache.probs_.assign(grid.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!cache.points_[k].valid) continue;
    cache.probs_[k] = std::exp(cache.points_[k].log_weight - top);
    total += cache.probs_[k];
  }
  for (double& w : cache.probs_) w /= total;
  return cache;
}

HyperDraw sample_hyper(const GridCache& cache, Rng& rng) {
  HyperDraw h;
  h.index = rng.categorical(cache.probabilities());
  const GridPointCache& pt = cache.points()[h.index];
  h.theta.tau2 = pt.tau2;
  h.theta.gamma = pt.gamma;
  h.theta.sigma2 = rng.inverse_gamma(cache.alpha_star(), pt.kappa_star);
  return h;
}

Vector sample_g(const SpatialDataset& data, const CovarianceModel& model, const HyperParams& theta, Rng& rng) {
  if (!(theta.sigma2 > 0.0) || !(theta.tau2 > 0.0)) throw Error(Errc::InvalidHyperparameter, "theta must be positive");
  const ProjectionCache proj(data.x_obs);
  const Index n = data.n_obs();
  SpdFactor fs;
  try {
    fs = chol_spd(model.marginal(theta.gamma, data.obs_sites));
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidHyperparameter) throw;
    throw Error(Errc::SingularCovariance, "Sigma_g is not positive definite");
  }
  Matrix m = fs.solve(Matrix(Matrix::Identity(n, n))) / theta.tau2;
  m -= proj.q() * proj.q().transpose();
  m.diagonal().array() += 1.0;
  const SpdFactor fm = chol_spd(0.5 * (m + m.transpose()));
  const Vector mean = fm.solve(proj.residual(data.y_obs));
  return mean + std::sqrt(theta.sigma2) * fm.solve_upper(rng.normal_vector(n));
}

Vector sample_delta(const ProjectionCache& proj, const Vector& y, double sigma2, Rng& rng) {
  if (!(sigma2 > 0.0)) throw Error(Errc::InvalidHyperparameter, "sigma2 must be positive");
  return proj.coefficients(y) + std::sqrt(sigma2) * proj.solve_r(rng.normal_vector(proj.cols()));
}

Vector sample_delta(const SpatialDataset& data, double sigma2, Rng& rng) {
  return sample_delta(ProjectionCache(data.x_obs), data.y_obs, sigma2, rng);
}

GlsResult gls_closed_form(const SpatialDataset& data, const CovarianceModel& model, const HyperParams& theta) {
  if (!(theta.sigma2 > 0.0) || !(theta.tau2 > 0.0)) throw Error(Errc::InvalidHyperparameter, "theta must be positive");
  Matrix sigma_y = theta.tau2 * theta.sigma2 * model.marginal(theta.gamma, data.obs_sites);
  sigma_y.diagonal().array() += theta.sigma2;
  SpdFactor f;
  try {
    f = chol_spd(0.5 * (sigma_y + sigma_y.transpose()));
  } catch (const Error&) {
    throw Error(Errc::SingularCovariance, "Sigma_Y is not positive definite");
  }
  const Matrix wx = f.solve(data.x_obs);
  const Matrix info = data.x_obs.transpose() * wx;
  const SpdFactor fi = chol_spd(0.5 * (info + info.transpose()));
  GlsResult out;
  out.cov = fi.solve(Matrix(Matrix::Identity(info.rows(), info.cols())));
  out.mean = fi.solve(Vector(wx.transpose() * data.y_obs));
  return out;
}

TestResult hypothesis_test(const Matrix& g_draws, const ProjectionCache& proj, double a) {
  if (!(a > 0.0)) throw Error(Errc::InvalidHyperparameter, "test half width must be positive");
  if (g_draws.rows() < 1) throw Error(Errc::InsufficientDraws, "hypothesis test needs at least one draw");
  if (g_draws.cols() != proj.rows()) throw Error(Errc::DimensionError, "g draws do not match the design rows");
  const Matrix c = proj.r().triangularView<Eigen::Upper>().solve(proj.q().transpose() * g_draws.transpose());
  Index inside = 0;
  for (Index b = 0; b < c.cols(); ++b) {
    if ((c.col(b).array().abs() < a).all()) ++inside;
  }
  TestResult t;
  t.half_width = a;
  t.posterior_prob_h0 = static_cast<double>(inside) / static_cast<double>(g_draws.rows());
  t.decision = t.posterior_prob_h0 > 0.5 ? TestDecision::AcceptNull : TestDecision::RejectNull;
  return t;
}

GrsrResult run_grsr(const SpatialDataset& data, const CovarianceModel& model, const PriorSpec& prior,
                    const GrsrOptions& options, const Rng& rng) {
  if (options.draws < 1) throw Error(Errc::InvalidHyperparameter, "draw count must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  const ProjectionCache proj(data.x_obs);
  const GridCache cache = precompute_grid(data, proj, model, prior, options.threads);

  GrsrResult out;
  out.draws.resize(options.draws);
  parallel_for(options.draws, options.threads, [&](std::size_t b) {
    const Rng stream = rng.split(b);
    Rng hyper_rng = stream.split(1);
    const HyperDraw h = sample_hyper(cache, hyper_rng);
    Rng g_rng = stream.split(2);
    Rng delta_rng = stream.split(3);
    Vector g;
    Vector delta;
    if (options.concurrent_steps) {
      auto g_future = std::async(std::launch::async, [&] { return cache.sample_g(h.index, h.theta.sigma2, g_rng); });
      delta = sample_delta(proj, data.y_obs, h.theta.sigma2, delta_rng);
      g = g_future.get();
    } else {
      g = cache.sample_g(h.index, h.theta.sigma2, g_rng);
      delta = sample_delta(proj, data.y_obs, h.theta.sigma2, delta_rng);
    }
    PosteriorDraw draw = PosteriorDraw::from_deconfounded(std::move(delta), std::move(g), proj, h.theta);
    if (data.n_miss() > 0) {
      Rng miss_rng = stream.split(4);
      draw.y_miss = draw_gaussian(kriging_moments(data, cache.spectrum_of(h.index), draw.beta, h.theta), miss_rng);
    } else {
      draw.y_miss = Vector(0);
    }
    out.draws[b] = std::move(draw);
  });

  Matrix g_draws(static_cast<Index>(options.draws), data.n_obs());
  for (std::size_t b = 0; b < options.draws; ++b) g_draws.row(static_cast<Index>(b)) = out.draws[b].g.transpose();
  out.test = hypothesis_test(g_draws, proj, options.test_half_width);
  const auto& modal = cache.points()[cache.modal_index()];
  out.modal_point = {modal.tau2, modal.gamma};
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

} // namespace rsr
