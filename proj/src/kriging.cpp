#include "rsr/kriging.hpp"

#include "rsr/error.hpp"

namespace rsr {

namespace {

void check_theta(const HyperParams& theta) {
  if (!(theta.sigma2 > 0.0) || !(theta.tau2 > 0.0)) {
    throw Error(Errc::InvalidHyperparameter, "sigma2 and tau2 must be positive");
  }
}

} // namespace

KrigingMoments kriging_moments(const SpatialDataset& data, const Matrix& sigma_g, const KrigingBlocks& blocks,
                               const Vector& beta, const HyperParams& theta) {
  check_theta(theta);
  const Index n = data.n_obs();
  const Index m = data.n_miss();
  if (sigma_g.rows() != n || sigma_g.cols() != n || blocks.sigma_cross.rows() != m || blocks.sigma_cross.cols() != n ||
      blocks.sigma_m.rows() != m || beta.size() != data.p()) {
    throw Error(Errc::DimensionError, "kriging operands have inconsistent shapes");
  }
  if (m == 0) return {Vector(0), Matrix(0, 0)};

  const double s2 = theta.sigma2;
  const double scale = theta.tau2 * s2;
  Matrix sigma_y = scale * sigma_g;
  sigma_y.diagonal().array() += s2;
  SpdFactor fy;
  try {
    fy = chol_spd(0.5 * (sigma_y + sigma_y.transpose()));
  } catch (const Error&) {
    throw Error(Errc::SingularCovariance, "marginal covariance of y is not positive definite");
  }
  const Matrix cross = scale * blocks.sigma_cross;
  KrigingMoments out;
  out.mean = data.x_miss * beta + cross * fy.solve(Vector(data.y_obs - data.x_obs * beta));
  out.cov = scale * blocks.sigma_m - cross * fy.solve(Matrix(cross.transpose()));
  out.cov.diagonal().array() += s2;
  return out;
}

KrigingMoments kriging_moments(const SpatialDataset& data, const CovarianceSpectrum& spectrum, const Vector& beta,
                               const HyperParams& theta) {
  check_theta(theta);
  if (!spectrum.valid) throw Error(Errc::SingularCovariance, "kriging requested at a singular grid point");
  const Index m = data.n_miss();
  if (m == 0) return {Vector(0), Matrix(0, 0)};

  const double t = theta.tau2;
  const Vector shrink = (1.0 + t * spectrum.lambda.array()).inverse().matrix();
  const Vector resid_rot = spectrum.u.transpose() * (data.y_obs - data.x_obs * beta);
  KrigingMoments out;
  out.mean = data.x_miss * beta + t * (spectrum.cross_u * shrink.cwiseProduct(resid_rot));
  const Matrix weighted = spectrum.cross_u * shrink.asDiagonal();
  Matrix inner = t * spectrum.sigma_m - (t * t) * (weighted * spectrum.cross_u.transpose());
  inner.diagonal().array() += 1.0;
  out.cov = theta.sigma2 * inner;
  return out;
}

Vector draw_gaussian(const KrigingMoments& moments, Rng& rng) {
  const Index m = moments.mean.size();
  if (m == 0) return Vector(0);
  const Matrix cov = 0.5 * (moments.cov + moments.cov.transpose());
  SpdFactor f;
  try {
    f = chol_spd(cov);
  } catch (const Error&) {
    f = chol_spd(cov, 1e-10);
  }
  return moments.mean + f.lower() * rng.normal_vector(m);
}

Vector sample_missing(const SpatialDataset& data, const Matrix& sigma_g, const KrigingBlocks& blocks,
                      const Vector& beta, const HyperParams& theta, Rng& rng) {
  if (data.n_miss() == 0) return Vector(0);
  return draw_gaussian(kriging_moments(data, sigma_g, blocks, beta, theta), rng);
}

} // namespace rsr
