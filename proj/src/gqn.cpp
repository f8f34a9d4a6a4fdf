#include "rsr/gqn.hpp"

#include <cmath>
#include <optional>
#include <fstream>
#include <string>

#include "json.hpp"

#include "rsr/covariance.hpp"
#include "rsr/error.hpp"

namespace rsr {

namespace {

struct PathInputs {
  Vector nu0;
  Matrix xi; ///< n x T standard normals
  Vector z_eta;
};

double sample_sd(const Vector& v) {
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / static_cast<double>(v.size() - 1));
}

double sample_var(const Vector& v) {
  const double s = sample_sd(v);
  return s * s;
}

Vector drift_unchecked(const Vector& nu, const GqnCoefficients& c) {
  const Index n = nu.size();
  const Vector e = (1.0 - nu.array()).exp().matrix();
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    double s = nu[i];
    double se = e[i];
    if (i > 0) {
      s += nu[i - 1];
      se += e[i - 1];
    }
    if (i + 1 < n) {
      s += nu[i + 1];
      se += e[i + 1];
    }
    out[i] = c.mu0 + c.zeta * s + c.zeta * s * se;
  }
  return out;
}

constexpr int kMaxPathAttempts = 20;

// g - Z eta along the fixed random inputs, or empty if the path overflows.
std::optional<Vector> deviation(const PathInputs& in, const GqnCoefficients& c, double innovation_sd) {
  Vector nu = in.nu0;
  for (Index t = 0; t < in.xi.cols(); ++t) {
    nu = drift_unchecked(nu, c) + innovation_sd * in.xi.col(t);
    if (!nu.allFinite()) return std::nullopt;
  }
  Vector h = drift_unchecked(nu, c);
  if (!h.allFinite()) return std::nullopt;
  return h;
}

// Smallest zeta with sd(g - Z eta) = 1 at fixed mu0. The sd is not monotone
// in zeta (a second, exploding branch appears for larger zeta), so the first
// crossing is bracketed by a geometric scan before bisecting.
std::optional<std::pair<double, Vector>> zeta_for_unit_sd(const PathInputs& in, double mu0, double innovation_sd) {
  double lo = std::log(1e-10);
  const auto first = deviation(in, {std::exp(lo), mu0}, innovation_sd);
  if (!first || sample_sd(*first) > 1.0) return std::nullopt;
  double hi = lo;
  bool bracketed = false;
  while (hi < std::log(1e3)) {
    hi += std::log(1.25);
    const auto h = deviation(in, {std::exp(hi), mu0}, innovation_sd);
    if (!h || sample_sd(*h) > 1.0) {
      bracketed = true;
      break;
    }
    lo = hi;
  }
  if (!bracketed) return std::nullopt;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto h = deviation(in, {std::exp(mid), mu0}, innovation_sd);
    if (!h || sample_sd(*h) > 1.0) hi = mid;
    else lo = mid;
  }
  auto h = deviation(in, {std::exp(lo), mu0}, innovation_sd);
  return std::make_pair(std::exp(lo), std::move(*h));
}

// Picks zeta so sd(g - Z eta) = 1 and mu0 so mean(g - Z eta) = 0. Both enter
// the recursion, so zeta is solved for each trial mu0 and mu0 is bisected on
// the resulting mean, which increases with mu0.
GqnCoefficients calibrate(const PathInputs& in, double innovation_sd) {
  const auto mean_at = [&](double mu0) {
    const auto z = zeta_for_unit_sd(in, mu0, innovation_sd);
    return z ? z->second.mean() : mu0;
  };
  double lo = -1.0;
  double hi = 1.0;
  for (int widen = 0; widen < 4 && mean_at(lo) > 0.0; ++widen) lo *= 2.0;
  for (int widen = 0; widen < 4 && mean_at(hi) < 0.0; ++widen) hi *= 2.0;
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_at(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  const double mu0 = 0.5 * (lo + hi);
  const auto z = zeta_for_unit_sd(in, mu0, innovation_sd);
  if (!z || std::abs(sample_sd(z->second) - 1.0) > 0.1 || std::abs(z->second.mean()) > 0.05) {
    throw Error(Errc::NonFinite, "GQN calibration did not converge");
  }
  return {z->first, mu0};
}

Vector json_vector(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

std::vector<double> std_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

} // namespace

void GqnConfig::validate() const {
  if (n < 2) throw Error(Errc::ConfigError, "n must be at least 2");
  if (time_steps < 1) throw Error(Errc::ConfigError, "time_steps must be at least 1");
  if (!(missing_frac >= 0.0 && missing_frac < 1.0)) throw Error(Errc::ConfigError, "missing_frac must lie in [0, 1)");
  if (beta_true.size() != 2) throw Error(Errc::ConfigError, "beta_true must have 2 entries (intercept and slope)");
  if (eta && eta->size() != 2) throw Error(Errc::ConfigError, "eta must have 2 entries");
  if (!(snr > 0.0)) throw Error(Errc::ConfigError, "snr must be positive");
  if (!(gp_range > 0.0)) throw Error(Errc::ConfigError, "gp_range must be positive");
  if (!(confounder_noise_sd >= 0.0)) throw Error(Errc::ConfigError, "confounder_noise_sd must be nonnegative");
  if (!(omega_bound > 0.0)) throw Error(Errc::ConfigError, "omega_bound must be positive");
  if (zeta.has_value() != mu0.has_value()) throw Error(Errc::ConfigError, "zeta and mu0 must be given together");
  if (!(innovation_sd >= 0.0)) throw Error(Errc::ConfigError, "innovation_sd must be nonnegative");
  const auto n_miss = static_cast<std::size_t>(std::floor(missing_frac * static_cast<double>(n) + 1e-9));
  if (n - n_miss <= 2) throw Error(Errc::ConfigError, "too few observed sites");
}

GqnConfig scenario_config(Scenario scenario) {
  GqnConfig c;
  c.omega_scaled = scenario == Scenario::Scaled;
  return c;
}

Vector gqn_sites(std::size_t n) {
  if (n < 2) return Vector::Zero(static_cast<Index>(n));
  return Vector::LinSpaced(static_cast<Index>(n), 0.0, 1.0);
}

Vector init_gp(const Vector& sites, Rng& rng, double range) {
  const Matrix sigma = CovarianceModel::exponential().marginal(range, sites);
  SpdFactor f;
  try {
    f = chol_spd(sigma);
  } catch (const Error&) {
    f = chol_spd(sigma, 1e-10);
  }
  return f.lower() * rng.normal_vector(sites.size());
}

Vector gqn_drift(const Vector& nu, const GqnCoefficients& c) {
  Vector out = drift_unchecked(nu, c);
  if (!out.allFinite()) throw Error(Errc::NonFinite, "GQN quadratic term overflowed; zeta is miscalibrated");
  return out;
}

Vector gqn_step(const Vector& nu_prev, const GqnCoefficients& c, const Vector& innovation) {
  if (innovation.size() != nu_prev.size()) throw Error(Errc::DimensionError, "innovation length mismatch");
  Vector out = gqn_drift(nu_prev, c) + innovation;
  if (!out.allFinite()) throw Error(Errc::NonFinite, "GQN step produced non-finite values");
  return out;
}

Vector build_g_gqn(const Vector& nu_t, const GqnCoefficients& c, const Vector& z_eta, double omega) {
  if (z_eta.size() != nu_t.size()) throw Error(Errc::DimensionError, "Z eta length mismatch");
  return omega * (z_eta + gqn_drift(nu_t, c));
}

SimulatedData simulate_dataset(const GqnConfig& config, const Rng& rng) {
  config.validate();
  const Index n = static_cast<Index>(config.n);
  const Vector sites = gqn_sites(config.n);
  Matrix x(n, 2);
  x.col(0).setOnes();
  x.col(1) = sites;
  const Vector eta = config.eta.value_or(-config.beta_true);

  Rng e_rng = rng.split(3);
  Rng eps_rng = rng.split(4);
  Rng mask_rng = rng.split(5);

  Matrix z = x;
  for (Index j = 0; j < z.cols(); ++j) z.col(j) += config.confounder_noise_sd * e_rng.normal_vector(n);
  const Vector mean_part = x * config.beta_true;

  PathInputs in;
  in.z_eta = z * eta;
  const auto draw_path = [&](int attempt) {
    Rng gp_rng = attempt == 0 ? rng.split(1) : rng.split(1).split(static_cast<std::uint64_t>(attempt));
    Rng xi_rng = attempt == 0 ? rng.split(2) : rng.split(2).split(static_cast<std::uint64_t>(attempt));
    in.nu0 = init_gp(sites, gp_rng, config.gp_range);
    in.xi.resize(n, config.time_steps);
    for (int t = 0; t < config.time_steps; ++t) in.xi.col(t) = xi_rng.normal_vector(n);
  };

  GqnCoefficients coeffs;
  double innovation_sd = config.innovation_sd;
  double sigma2 = 0.0;
  const auto signal_var = [&](const GqnCoefficients& c, double sd) {
    const auto h = deviation(in, c, sd);
    if (!h) throw Error(Errc::NonFinite, "GQN path overflowed");
    return sample_var(Vector(mean_part + in.z_eta + *h));
  };
  if (config.zeta) {
    draw_path(0);
    coeffs = {*config.zeta, *config.mu0};
    sigma2 = signal_var(coeffs, innovation_sd) / config.snr;
  } else {
    // First pass without innovations fixes sigma2 from the SNR; then the
    // innovations (variance sigma2) are switched on and both steps repeat
    // until sigma2 stops moving. Some paths admit no centred unit-sd
    // solution (the mean jumps across zero between branches); those are
    // redrawn from a fresh substream.
    for (int attempt = 0;; ++attempt) {
      draw_path(attempt);
      try {
        coeffs = calibrate(in, 0.0);
        sigma2 = signal_var(coeffs, 0.0) / config.snr;
        for (int it = 0; it < 50; ++it) {
          innovation_sd = std::sqrt(sigma2);
          coeffs = calibrate(in, innovation_sd);
          const double next = signal_var(coeffs, innovation_sd) / config.snr;
          const bool done = std::abs(next - sigma2) <= 1e-3 * sigma2;
          sigma2 = next;
          if (done) break;
        }
        break;
      } catch (const Error& e) {
        if (e.code() != Errc::NonFinite || attempt + 1 >= kMaxPathAttempts) throw;
        innovation_sd = config.innovation_sd;
      }
    }
  }

  Vector nu = in.nu0;
  for (Index t = 0; t < in.xi.cols(); ++t) nu = gqn_step(nu, coeffs, innovation_sd * in.xi.col(t));
  Vector g = build_g_gqn(nu, coeffs, in.z_eta);
  double omega = 1.0;
  if (config.omega_scaled) {
    omega = config.omega_bound / g.cwiseAbs().maxCoeff();
    g *= omega;
  }

  SimulatedData out;
  SimTruth& t = out.truth;
  t.sites = sites;
  t.x = x;
  t.beta_true = config.beta_true;
  t.g_true = g;
  t.z_eta = in.z_eta;
  t.delta_true = lram_forward(config.beta_true, g, ProjectionCache(x));
  t.sigma2_true = sigma2;
  t.y_full = mean_part + g + std::sqrt(sigma2) * eps_rng.normal_vector(n);
  t.zeta = coeffs.zeta;
  t.mu0 = coeffs.mu0;
  t.omega = omega;

  const auto n_miss = static_cast<Index>(std::floor(config.missing_frac * static_cast<double>(n) + 1e-9));
  std::vector<Index> perm(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (Index i = 0; i < n_miss; ++i) {
    const auto j = i + std::min(n - i - 1, static_cast<Index>(mask_rng.uniform() * static_cast<double>(n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  t.missing_mask.assign(static_cast<std::size_t>(n), false);
  for (Index i = 0; i < n_miss; ++i) t.missing_mask[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = true;

  Vector y_obs(n - n_miss), obs_sites(n - n_miss), miss_sites(n_miss);
  Matrix x_obs(n - n_miss, 2), x_miss(n_miss, 2);
  Index io = 0, im = 0;
  for (Index i = 0; i < n; ++i) {
    if (t.missing_mask[static_cast<std::size_t>(i)]) {
      miss_sites[im] = sites[i];
      x_miss.row(im++) = x.row(i);
    } else {
      y_obs[io] = t.y_full[i];
      obs_sites[io] = sites[i];
      x_obs.row(io++) = x.row(i);
    }
  }
  out.data = validate_dataset(std::move(y_obs), std::move(x_obs), std::move(obs_sites), std::move(miss_sites),
                              std::move(x_miss));
  return out;
}

void write_truth_json(const std::filesystem::path& path, const SimTruth& truth) {
  nlohmann::json j;
  j["beta_true"] = std_vector(truth.beta_true);
  j["delta_true"] = std_vector(truth.delta_true);
  j["sigma2_true"] = truth.sigma2_true;
  j["mask"] = truth.missing_mask;
  j["sites"] = std_vector(truth.sites);
  j["g_true"] = std_vector(truth.g_true);
  j["z_eta"] = std_vector(truth.z_eta);
  j["y_full"] = std_vector(truth.y_full);
  j["zeta"] = truth.zeta;
  j["mu0"] = truth.mu0;
  j["omega"] = truth.omega;
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(Errc::IoError, "failed writing " + path.string());
}

SimTruth read_truth_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    SimTruth t;
    t.beta_true = json_vector(j.at("beta_true"));
    t.delta_true = json_vector(j.at("delta_true"));
    t.sigma2_true = j.at("sigma2_true").get<double>();
    t.missing_mask = j.at("mask").get<std::vector<bool>>();
    t.sites = json_vector(j.at("sites"));
    t.g_true = json_vector(j.at("g_true"));
    t.z_eta = json_vector(j.at("z_eta"));
    t.y_full = json_vector(j.at("y_full"));
    t.zeta = j.at("zeta").get<double>();
    t.mu0 = j.at("mu0").get<double>();
    t.omega = j.at("omega").get<double>();
    t.x.resize(t.sites.size(), 2);
    t.x.col(0).setOnes();
    t.x.col(1) = t.sites;
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::IoError, "malformed truth file " + path.string() + ": " + e.what());
  }
}

} // namespace rsr
