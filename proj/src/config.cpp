#include "rsr/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "rsr/error.hpp"
#include "rsr/parallel.hpp"

namespace rsr {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw Error(Errc::ConfigError, msg); }

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) fail("'" + where + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      fail("unknown key '" + item.key() + "'" + (where.empty() ? "" : " in '" + where + "'"));
    }
  }
}

std::string path_of(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

double get_number(const json& obj, const std::string& where, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail("'" + path_of(where, key) + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail("'" + path_of(where, key) + "' must be finite");
  return d;
}

double get_positive(const json& obj, const std::string& where, const std::string& key, double fallback) {
  const double v = get_number(obj, where, key, fallback);
  if (!(v > 0.0)) fail("'" + path_of(where, key) + "' must be positive");
  return v;
}

std::uint64_t get_count(const json& obj, const std::string& where, const std::string& key, std::uint64_t fallback,
                        std::uint64_t min = 0) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    fail("'" + path_of(where, key) + "' must be a nonnegative integer");
  }
  const auto u = v.get<std::uint64_t>();
  if (u < min) fail("'" + path_of(where, key) + "' must be at least " + std::to_string(min));
  return u;
}

bool get_bool(const json& obj, const std::string& where, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) fail("'" + path_of(where, key) + "' must be true or false");
  return obj.at(key).get<bool>();
}

std::string get_string(const json& obj, const std::string& where, const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) fail("'" + path_of(where, key) + "' must be a string");
  return obj.at(key).get<std::string>();
}

std::vector<double> get_numbers(const json& obj, const std::string& where, const std::string& key,
                                std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array()) fail("'" + path_of(where, key) + "' must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail("'" + path_of(where, key) + "' must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())); }

Method parse_method(const std::string& s, const std::string& where) {
  if (s == "slmm" || s == "gibbs") return Method::Slmm;
  if (s == "trsr") return Method::Trsr;
  if (s == "grsr") return Method::Grsr;
  fail("'" + where + "' has unknown method '" + s + "'");
}

const std::set<std::string>& known_assertions() {
  static const std::set<std::string> s{"equivalence", "baseline_ranges", "scaled_claims", "all_rejected", "timing"};
  return s;
}

} // namespace

PriorSpec RunConfig::prior() const {
  PriorSpec p{alpha, kappa, HyperGrid::tau2_range(tau2_min, tau2_max, grid_k, gammas)};
  p.validate();
  return p;
}

CovarianceModel RunConfig::build_model(const Vector& all_sites) const {
  if (model.family == "bspline") return CovarianceModel::bspline(model.rank, model.rho);
  if (model.family == "exponential") return CovarianceModel::exponential(model.nugget);
  if (model.family == "car") return CovarianceModel::car_chain(all_sites);
  throw Error(Errc::FamilyMismatch, "family '" + model.family + "' cannot be built from site coordinates alone");
}

CovarianceModel RunConfig::build_model(const SpatialDataset& data) const {
  if (model.family == "moran") {
    const ProjectionCache proj(data.x_obs);
    return CovarianceModel::moran(chain_adjacency(data.obs_sites), proj, model.rank, data.obs_sites, model.rho);
  }
  Vector all(data.n_obs() + data.n_miss());
  all << data.obs_sites, data.miss_sites;
  return build_model(all);
}

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig c;
  c.scenario = scenario;
  c.n_reps = n_reps;
  c.methods = methods;
  c.seed = seed;
  c.gqn = simulation;
  c.gqn.omega_scaled = scenario == Scenario::Scaled;
  c.model = build_model(gqn_sites(simulation.n));
  c.prior = prior();
  c.grsr_draws = grsr.draws;
  c.gibbs = gibbs;
  c.test_half_width = grsr.test_half_width;
  c.level = level;
  c.alpha = test_alpha;
  c.threads = threads;
  return c;
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  allow_keys(root, "", {"seed", "threads", "output_dir", "scenario", "simulation", "model", "prior", "grid", "grsr",
                        "gibbs", "bench"});
  RunConfig c;
  c.seed = get_count(root, "", "seed", c.seed);
  c.threads = static_cast<int>(get_count(root, "", "threads", static_cast<std::uint64_t>(default_threads()), 1));
  c.output_dir = get_string(root, "", "output_dir", c.output_dir);
  const std::string scenario = get_string(root, "", "scenario", "baseline");
  if (scenario == "baseline") c.scenario = Scenario::Baseline;
  else if (scenario == "scaled") c.scenario = Scenario::Scaled;
  else fail("'scenario' must be \"baseline\" or \"scaled\"");

  if (root.contains("simulation")) {
    const json& s = root.at("simulation");
    allow_keys(s, "simulation", {"n", "beta_true", "eta", "confounder_noise_sd", "time_steps", "gp_range", "snr",
                                 "missing_frac", "omega_bound", "zeta", "mu0", "innovation_sd"});
    GqnConfig& g = c.simulation;
    g.n = get_count(s, "simulation", "n", g.n, 3);
    g.beta_true = to_vector(get_numbers(s, "simulation", "beta_true", {g.beta_true[0], g.beta_true[1]}));
    if (s.contains("eta")) g.eta = to_vector(get_numbers(s, "simulation", "eta", {}));
    g.confounder_noise_sd = get_number(s, "simulation", "confounder_noise_sd", g.confounder_noise_sd);
    g.time_steps = static_cast<int>(get_count(s, "simulation", "time_steps", static_cast<std::uint64_t>(g.time_steps), 1));
    g.gp_range = get_positive(s, "simulation", "gp_range", g.gp_range);
    g.snr = get_positive(s, "simulation", "snr", g.snr);
    g.missing_frac = get_number(s, "simulation", "missing_frac", g.missing_frac);
    g.omega_bound = get_positive(s, "simulation", "omega_bound", g.omega_bound);
    if (s.contains("zeta")) g.zeta = get_number(s, "simulation", "zeta", 0.0);
    if (s.contains("mu0")) g.mu0 = get_number(s, "simulation", "mu0", 0.0);
    g.innovation_sd = get_number(s, "simulation", "innovation_sd", g.innovation_sd);
  }
  c.simulation.omega_scaled = c.scenario == Scenario::Scaled;

  if (root.contains("model")) {
    const json& m = root.at("model");
    allow_keys(m, "model", {"family", "rank", "rho", "nugget"});
    c.model.family = get_string(m, "model", "family", c.model.family);
    c.model.rank = static_cast<int>(get_count(m, "model", "rank", static_cast<std::uint64_t>(c.model.rank), 1));
    c.model.rho = get_number(m, "model", "rho", c.model.rho);
    c.model.nugget = get_number(m, "model", "nugget", c.model.nugget);
    static const std::set<std::string> families{"bspline", "exponential", "car", "moran"};
    if (!families.count(c.model.family)) fail("'model.family' must be one of bspline, exponential, car, moran");
    if (c.model.rho < 0.0) fail("'model.rho' must be nonnegative");
    if (c.model.nugget < 0.0) fail("'model.nugget' must be nonnegative");
  }

  if (root.contains("prior")) {
    const json& p = root.at("prior");
    allow_keys(p, "prior", {"alpha", "kappa"});
    c.alpha = get_positive(p, "prior", "alpha", c.alpha);
    c.kappa = get_positive(p, "prior", "kappa", c.kappa);
  }

  if (root.contains("grid")) {
    const json& g = root.at("grid");
    allow_keys(g, "grid", {"tau2_min", "tau2_max", "K", "gamma"});
    c.tau2_min = get_positive(g, "grid", "tau2_min", c.tau2_min);
    c.tau2_max = get_positive(g, "grid", "tau2_max", c.tau2_max);
    c.grid_k = get_count(g, "grid", "K", c.grid_k, 1);
    c.gammas = get_numbers(g, "grid", "gamma", {});
    if (c.tau2_max < c.tau2_min) fail("'grid.tau2_max' must be at least 'grid.tau2_min'");
  }
  const bool needs_gamma = c.model.family == "exponential" || c.model.family == "car";
  if (needs_gamma && c.gammas.empty()) fail("'grid.gamma' is required for the " + c.model.family + " family");
  if (!needs_gamma && !c.gammas.empty()) fail("'grid.gamma' is not used by the " + c.model.family + " family");

  if (root.contains("grsr")) {
    const json& g = root.at("grsr");
    allow_keys(g, "grsr", {"draws", "test_half_width", "concurrent_steps"});
    c.grsr.draws = get_count(g, "grsr", "draws", c.grsr.draws, 1);
    c.grsr.test_half_width = get_positive(g, "grsr", "test_half_width", c.grsr.test_half_width);
    c.grsr.concurrent_steps = get_bool(g, "grsr", "concurrent_steps", c.grsr.concurrent_steps);
  }
  c.grsr.threads = c.threads;

  if (root.contains("gibbs")) {
    const json& g = root.at("gibbs");
    allow_keys(g, "gibbs", {"iters", "burn_in", "thin"});
    c.gibbs.iters = get_count(g, "gibbs", "iters", c.gibbs.iters, 1);
    c.gibbs.burn_in = get_count(g, "gibbs", "burn_in", c.gibbs.burn_in);
    c.gibbs.thin = get_count(g, "gibbs", "thin", c.gibbs.thin, 1);
    if (c.gibbs.iters <= c.gibbs.burn_in) fail("'gibbs.iters' must exceed 'gibbs.burn_in'");
  }

  if (root.contains("bench")) {
    const json& b = root.at("bench");
    allow_keys(b, "bench", {"n_reps", "methods", "level", "alpha", "assert"});
    c.n_reps = get_count(b, "bench", "n_reps", c.n_reps, 1);
    if (b.contains("methods")) {
      if (!b.at("methods").is_array() || b.at("methods").empty()) fail("'bench.methods' must be a nonempty array");
      c.methods.clear();
      for (const auto& m : b.at("methods")) {
        if (!m.is_string()) fail("'bench.methods' entries must be strings");
        const Method method = parse_method(m.get<std::string>(), "bench.methods");
        if (std::find(c.methods.begin(), c.methods.end(), method) == c.methods.end()) c.methods.push_back(method);
      }
    }
    c.level = get_number(b, "bench", "level", c.level);
    if (!(c.level > 0.0 && c.level < 1.0)) fail("'bench.level' must lie in (0, 1)");
    c.test_alpha = get_number(b, "bench", "alpha", c.test_alpha);
    if (!(c.test_alpha > 0.0 && c.test_alpha < 1.0)) fail("'bench.alpha' must lie in (0, 1)");
    if (b.contains("assert")) {
      if (!b.at("assert").is_array()) fail("'bench.assert' must be an array of names");
      for (const auto& a : b.at("assert")) {
        if (!a.is_string() || !known_assertions().count(a.get<std::string>())) {
          fail("'bench.assert' has unknown check " + a.dump());
        }
        c.assertions.push_back(a.get<std::string>());
      }
    }
  }

  try {
    c.simulation.validate();
  } catch (const Error& e) {
    fail(std::string("simulation: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

} // namespace rsr
