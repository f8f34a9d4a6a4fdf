#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rsr/covariance.hpp"
#include "rsr/gibbs.hpp"
#include "rsr/gqn.hpp"
#include "rsr/grsr.hpp"
#include "rsr/metrics.hpp"

namespace rsr {

enum class Method { Slmm, Trsr, Grsr };

std::string_view to_string(Method m) noexcept;
std::string_view to_string(Scenario s) noexcept;

struct ExperimentConfig {
  Scenario scenario = Scenario::Baseline;
  std::size_t n_reps = 100;
  std::vector<Method> methods{Method::Slmm, Method::Trsr, Method::Grsr};
  std::uint64_t seed = 1;
  GqnConfig gqn;
  CovarianceModel model = CovarianceModel::bspline(10, 0.01);
  PriorSpec prior{1.0, 1.0, HyperGrid::tau2_range(0.01, 3.0, 1000)};
  std::size_t grsr_draws = 100;
  GibbsOptions gibbs;
  double test_half_width = 0.25;
  double level = 0.95;
  double alpha = 0.05;
  int threads = 1;
};

/// The reference study configuration for `scenario`.
ExperimentConfig default_experiment(Scenario scenario);

struct MethodMetrics {
  Method method;
  ReplicateMetrics metrics;
};

struct ReplicateResult {
  std::size_t rep = 0;
  std::vector<MethodMetrics> methods;
  std::optional<TestResult> test;
  double sigma2_true = 0.0;

  const ReplicateMetrics& at(Method m) const;
};

enum class Metric { RmseDelta, RmseBeta, Mspe, MeanPredVar, CpuSeconds, CoverageDelta, CoverageBeta };

std::string_view to_string(Metric m) noexcept;
double metric_value(const ReplicateMetrics& r, Metric m);
const std::vector<Metric>& all_metrics();

struct MethodSummary {
  Method method;
  ReplicateMetrics mean;
  /// Standard error of each mean across replicates; absent for one replicate.
  std::optional<ReplicateMetrics> se;
};

struct ExperimentReport {
  Scenario scenario = Scenario::Baseline;
  std::size_t n_reps = 0;
  std::vector<Method> methods;
  std::vector<ReplicateResult> replicates;
  std::vector<MethodSummary> summary;
  std::size_t null_accepted = 0;
  std::size_t null_rejected = 0;

  std::vector<double> column(Method m, Metric metric) const;
  const MethodSummary& summary_of(Method m) const;
  bool has(Method m) const;
};

/// Replicate r uses rng(seed).split(r); data, GRSR and Gibbs draw from
/// separate children, so the report does not depend on `threads`.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Aggregates already computed replicates (sorted by index) into a report.
ExperimentReport summarize(Scenario scenario, const std::vector<Method>& methods,
                           std::vector<ReplicateResult> replicates);

void write_report_csv(const std::filesystem::path& path, const ExperimentReport& report);
void write_replicates_csv(const std::filesystem::path& path, const ExperimentReport& report);
std::string format_report_table(const ExperimentReport& report);

struct CriterionCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// GRSR vs SLMM: paired differences in MSPE, RMSE_delta and mean predictive
/// variance neither significant (Bonferroni over the three) nor larger than
/// two paired SEs.
CriterionCheck check_equivalence(const ExperimentReport& report, double alpha = 0.05);
/// RMSE, coverage and MSPE ranges on data generated without omega scaling.
CriterionCheck check_baseline_ranges(const ExperimentReport& report);
/// Null acceptance and coverage ordering on omega-scaled data.
CriterionCheck check_scaled_claims(const ExperimentReport& report, double alpha = 0.05);
/// The hypothesis test rejects in every replicate.
CriterionCheck check_all_rejected(const ExperimentReport& report);
/// Mean GRSR time per replicate at most `max_ratio` times the Gibbs time.
CriterionCheck check_timing(const ExperimentReport& report, double max_ratio = 0.67);

} // namespace rsr
