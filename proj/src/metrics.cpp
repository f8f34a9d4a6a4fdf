#include "rsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "rsr/error.hpp"

namespace rsr {

double rmse(const Vector& truth, const Vector& estimate) {
  if (truth.size() != estimate.size() || truth.size() == 0) throw Error(Errc::DimensionError, "rmse operand sizes");
  return (truth - estimate).norm() / std::sqrt(static_cast<double>(truth.size()));
}

double mspe(const Vector& y_true, const Vector& y_hat) {
  if (y_true.size() != y_hat.size() || y_true.size() == 0) throw Error(Errc::DimensionError, "mspe operand sizes");
  return (y_true - y_hat).squaredNorm() / static_cast<double>(y_true.size());
}

double sample_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw Error(Errc::InsufficientDraws, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::pair<double, double> credible_interval(const Vector& draws, double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(Errc::InvalidHyperparameter, "level must lie in (0, 1)");
  const std::vector<double> v(draws.data(), draws.data() + draws.size());
  const double tail = 0.5 * (1.0 - level);
  return {sample_quantile(v, tail), sample_quantile(v, 1.0 - tail)};
}

double coverage(const Matrix& draws, const Vector& truth, double level) {
  if (draws.rows() < 20) throw Error(Errc::InsufficientDraws, "coverage needs at least 20 draws");
  if (draws.cols() != truth.size()) throw Error(Errc::DimensionError, "coverage operand sizes");
  Index hit = 0;
  for (Index j = 0; j < draws.cols(); ++j) {
    const auto [lo, hi] = credible_interval(draws.col(j), level);
    if (lo <= truth[j] && truth[j] <= hi) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

PairedTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b, double alpha,
                         std::size_t comparisons) {
  if (a.size() != b.size()) throw Error(Errc::DimensionError, "paired samples differ in length");
  if (a.size() < 2) throw Error(Errc::InsufficientDraws, "paired t test needs at least two pairs");
  if (comparisons < 1) throw Error(Errc::InvalidHyperparameter, "comparisons must be at least 1");
  const auto m = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= m;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ss += (a[i] - b[i] - mean) * (a[i] - b[i] - mean);
  const double sd = std::sqrt(ss / (m - 1.0));

  PairedTest out;
  out.mean_diff = mean;
  out.se = sd / std::sqrt(m);
  if (!(out.se > 1e-14 * std::max(1.0, std::abs(mean)))) {
    out.degenerate = true;
    out.t = mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean);
    return out;
  }
  out.t = mean / out.se;
  const boost::math::students_t dist(m - 1.0);
  out.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(out.t)));
  out.significant = out.p_value < alpha / static_cast<double>(comparisons);
  return out;
}

namespace {

template <class Get>
Matrix stack(const std::vector<PosteriorDraw>& draws, Get get) {
  if (draws.empty()) return Matrix(0, 0);
  Matrix out(static_cast<Index>(draws.size()), get(draws.front()).size());
  for (std::size_t b = 0; b < draws.size(); ++b) out.row(static_cast<Index>(b)) = get(draws[b]).transpose();
  return out;
}

} // namespace

Matrix stack_delta(const std::vector<PosteriorDraw>& draws) {
  return stack(draws, [](const PosteriorDraw& d) -> const Vector& { return d.delta; });
}

Matrix stack_beta(const std::vector<PosteriorDraw>& draws) {
  return stack(draws, [](const PosteriorDraw& d) -> const Vector& { return d.beta; });
}

Matrix stack_y_miss(const std::vector<PosteriorDraw>& draws) {
  return stack(draws, [](const PosteriorDraw& d) -> const Vector& { return d.y_miss; });
}

double mean_pred_var(const Matrix& y_draws) {
  if (y_draws.rows() < 2) throw Error(Errc::InsufficientDraws, "predictive variance needs at least two draws");
  if (y_draws.cols() == 0) return std::numeric_limits<double>::quiet_NaN();
  const Eigen::RowVectorXd mean = y_draws.colwise().mean();
  const Matrix centered = y_draws.rowwise() - mean;
  const double b = static_cast<double>(y_draws.rows());
  return (centered.colwise().squaredNorm() / (b - 1.0)).mean();
}

ReplicateMetrics replicate_metrics(const std::vector<PosteriorDraw>& draws, const Vector& delta_true,
                                   const Vector& beta_true, const Vector& y_miss_true, bool beta_from_delta,
                                   double cpu_seconds, double level) {
  if (draws.empty()) throw Error(Errc::InsufficientDraws, "no draws to summarize");
  const Matrix delta = stack_delta(draws);
  const Matrix beta = beta_from_delta ? delta : stack_beta(draws);
  const Matrix ym = stack_y_miss(draws);

  ReplicateMetrics m;
  m.rmse_delta = rmse(delta_true, delta.colwise().mean().transpose());
  m.rmse_beta = rmse(beta_true, beta.colwise().mean().transpose());
  if (ym.cols() > 0) {
    m.mspe = mspe(y_miss_true, ym.colwise().mean().transpose());
    m.mean_pred_var = mean_pred_var(ym);
  } else {
    m.mspe = std::numeric_limits<double>::quiet_NaN();
    m.mean_pred_var = std::numeric_limits<double>::quiet_NaN();
  }
  m.cpu_seconds = cpu_seconds;
  m.coverage_delta = coverage(delta, delta_true, level);
  m.coverage_beta = coverage(beta, beta_true, level);
  return m;
}

} // namespace rsr
