#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rsr/bench.hpp"

namespace rsr {

struct ModelSpec {
  /// bspline | exponential | car | moran
  std::string family = "bspline";
  int rank = 10;
  double rho = 0.01;
  double nugget = 0.0;
};

/// Everything a CLI run can be configured with. Defaults reproduce the
/// reference simulation study.
struct RunConfig {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string output_dir = "out";
  Scenario scenario = Scenario::Baseline;
  GqnConfig simulation;
  ModelSpec model;
  double alpha = 1.0;
  double kappa = 1.0;
  double tau2_min = 0.01;
  double tau2_max = 3.0;
  std::size_t grid_k = 1000;
  std::vector<double> gammas;
  GrsrOptions grsr;
  GibbsOptions gibbs;
  std::size_t n_reps = 100;
  std::vector<Method> methods{Method::Slmm, Method::Trsr, Method::Grsr};
  double level = 0.95;
  double test_alpha = 0.05;
  /// Named checks evaluated by `bench`: equivalence, baseline_ranges, scaled_claims,
  /// all_rejected, timing.
  std::vector<std::string> assertions;

  PriorSpec prior() const;
  /// Covariance family for a fit on `data` (CAR uses a chain over all sites,
  /// the Moran basis the observed sites).
  CovarianceModel build_model(const SpatialDataset& data) const;
  /// Covariance family for sites known in advance (simulation grid).
  CovarianceModel build_model(const Vector& all_sites) const;
  ExperimentConfig experiment() const;
};

/// Throws Error(ConfigError) naming the offending key on any schema violation.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

} // namespace rsr
