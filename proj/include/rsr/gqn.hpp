#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "rsr/model.hpp"
#include "rsr/rng.hpp"

namespace rsr {

enum class Scenario { Baseline, Scaled };

/// Settings for the nonlinear space-time generator. With `omega_scaled` the
/// response uses omega*g, omega chosen so |omega*g| <= omega_bound.
struct GqnConfig {
  std::size_t n = 200;
  Vector beta_true = (Vector(2) << -1.0, 2.0).finished();
  /// Confounder coefficients; defaults to -beta_true.
  std::optional<Vector> eta;
  double confounder_noise_sd = 0.1;
  int time_steps = 5;
  double gp_range = 1.0 / 3.0;
  double snr = 2.0;
  double missing_frac = 0.10;
  bool omega_scaled = false;
  double omega_bound = 0.1;
  /// When both are set calibration is skipped and the innovation sd is
  /// taken from `innovation_sd` (default 0).
  std::optional<double> zeta;
  std::optional<double> mu0;
  double innovation_sd = 0.0;

  void validate() const;
};

GqnConfig scenario_config(Scenario scenario);

struct GqnCoefficients {
  double zeta = 0.0;
  double mu0 = 0.0;
};

struct SimTruth {
  Vector sites;
  Matrix x;
  Vector beta_true;
  Vector delta_true;
  Vector g_true;
  /// Z eta, before any omega scaling.
  Vector z_eta;
  double sigma2_true = 0.0;
  Vector y_full;
  std::vector<bool> missing_mask;
  double zeta = 0.0;
  double mu0 = 0.0;
  double omega = 1.0;
};

struct SimulatedData {
  SpatialDataset data;
  SimTruth truth;
};

/// n equally spaced sites on [0, 1].
Vector gqn_sites(std::size_t n);

/// One draw of a zero-mean, unit-variance GP with exponential covariogram.
Vector init_gp(const Vector& sites, Rng& rng, double range = 1.0 / 3.0);

/// Deterministic part of the recursion at every site, with the closed
/// neighbourhood N(i) = {i-1, i, i+1} on the sorted grid:
///   mu0 + zeta * sum_N nu + zeta * (sum_N nu) * (sum_N exp(1 - nu)).
Vector gqn_drift(const Vector& nu, const GqnCoefficients& c);

/// drift(nu_prev) + innovation. Throws NonFinite if the quadratic term overflows.
Vector gqn_step(const Vector& nu_prev, const GqnCoefficients& c, const Vector& innovation);

/// omega * (Z eta + drift(nu_T)).
Vector build_g_gqn(const Vector& nu_t, const GqnCoefficients& c, const Vector& z_eta, double omega = 1.0);

SimulatedData simulate_dataset(const GqnConfig& config, const Rng& rng);

void write_truth_json(const std::filesystem::path& path, const SimTruth& truth);
SimTruth read_truth_json(const std::filesystem::path& path);

} // namespace rsr
