#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "rsr/model.hpp"

namespace rsr {

/// ||truth - estimate|| / sqrt(p)
double rmse(const Vector& truth, const Vector& estimate);
/// Mean squared error over the missing sites.
double mspe(const Vector& y_true, const Vector& y_hat);

/// Sample quantile with linear interpolation between order statistics.
double sample_quantile(std::vector<double> values, double prob);
/// Equal-tailed interval from the empirical quantiles of one column.
std::pair<double, double> credible_interval(const Vector& draws, double level = 0.95);
/// Fraction of coordinates whose equal-tailed interval (columns of the
/// B x p `draws`) contains the truth. Throws InsufficientDraws if B < 20.
double coverage(const Matrix& draws, const Vector& truth, double level = 0.95);

struct PairedTest {
  double mean_diff = 0.0;
  double se = 0.0;
  double t = 0.0;
  double p_value = 1.0;
  bool significant = false;
  /// Differences had zero variance; reported as p = 1, not significant.
  bool degenerate = false;
};

/// Two-sided paired t test on a - b; significant iff p < alpha / comparisons.
PairedTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b, double alpha = 0.05,
                         std::size_t comparisons = 1);

struct ReplicateMetrics {
  double rmse_delta = 0.0;
  double rmse_beta = 0.0;
  /// NaN when there are no missing sites, likewise mean_pred_var.
  double mspe = 0.0;
  double mean_pred_var = 0.0;
  double cpu_seconds = 0.0;
  double coverage_delta = 0.0;
  double coverage_beta = 0.0;
};

/// Rows are draws.
Matrix stack_delta(const std::vector<PosteriorDraw>& draws);
Matrix stack_beta(const std::vector<PosteriorDraw>& draws);
Matrix stack_y_miss(const std::vector<PosteriorDraw>& draws);

/// Average across sites of the per-site sample variance of the draws.
double mean_pred_var(const Matrix& y_draws);

/// Metrics of one fitted replicate. With `beta_from_delta` the delta draws
/// stand in for beta, which is how the traditional RSR reports beta.
ReplicateMetrics replicate_metrics(const std::vector<PosteriorDraw>& draws, const Vector& delta_true,
                                   const Vector& beta_true, const Vector& y_miss_true, bool beta_from_delta,
                                   double cpu_seconds, double level = 0.95);

} // namespace rsr
