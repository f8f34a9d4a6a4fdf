#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rsr/bench.hpp"
#include "rsr/config.hpp"
#include "rsr/dataset_io.hpp"
#include "rsr/draws_io.hpp"
#include "rsr/error.hpp"
#include "rsr/gibbs.hpp"
#include "rsr/gqn.hpp"
#include "rsr/grsr.hpp"
#include "rsr/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitAcceptance = 4;

struct Common {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

rsr::RunConfig resolve(const Common& c) {
  rsr::RunConfig cfg = c.config_path.empty() ? rsr::parse_run_config("{}") : rsr::load_run_config(c.config_path);
  if (!c.out_dir.empty()) cfg.output_dir = c.out_dir;
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) {
    if (*c.threads < 1) throw rsr::Error(rsr::Errc::ConfigError, "--threads must be at least 1");
    cfg.threads = *c.threads;
    cfg.grsr.threads = *c.threads;
    cfg.gibbs.threads = *c.threads;
  }
  return cfg;
}

fs::path prepare_out(const rsr::RunConfig& cfg) {
  const fs::path out(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw rsr::Error(rsr::Errc::IoError, "cannot create output directory " + out.string() + ": " + ec.message());
  return out;
}

json column_summary(const rsr::Matrix& draws, double level) {
  json out = json::array();
  const double b = static_cast<double>(draws.rows());
  for (rsr::Index j = 0; j < draws.cols(); ++j) {
    const rsr::Vector col = draws.col(j);
    const double mean = col.mean();
    const double sd = draws.rows() > 1 ? std::sqrt((col.array() - mean).square().sum() / (b - 1.0)) : 0.0;
    const auto [lo, hi] = rsr::credible_interval(col, level);
    out.push_back({{"mean", mean}, {"sd", sd}, {"lower", lo}, {"upper", hi}});
  }
  return out;
}

rsr::Matrix scalar_column(const std::vector<rsr::PosteriorDraw>& draws, double rsr::HyperParams::*field) {
  rsr::Matrix m(static_cast<rsr::Index>(draws.size()), 1);
  for (std::size_t b = 0; b < draws.size(); ++b) m(static_cast<rsr::Index>(b), 0) = draws[b].theta.*field;
  return m;
}

int cmd_simulate(const Common& common) {
  const rsr::RunConfig cfg = resolve(common);
  const fs::path out = prepare_out(cfg);
  rsr::GqnConfig gqn = cfg.simulation;
  gqn.omega_scaled = cfg.scenario == rsr::Scenario::Scaled;
  const rsr::SimulatedData sim = rsr::simulate_dataset(gqn, rsr::Rng(cfg.seed));
  rsr::write_dataset_csv(out / "dataset.csv", sim.data);
  rsr::write_truth_json(out / "truth.json", sim.truth);
  std::cout << "wrote " << (out / "dataset.csv").string() << " (" << sim.data.n_obs() << " observed, "
            << sim.data.n_miss() << " missing) and " << (out / "truth.json").string() << '\n';
  return 0;
}

int cmd_fit(const Common& common, const std::string& data_path, const std::string& method, bool emit_g) {
  const rsr::RunConfig cfg = resolve(common);
  const fs::path out = prepare_out(cfg);
  const rsr::SpatialDataset data = rsr::read_dataset_csv(data_path);
  const rsr::CovarianceModel model = cfg.build_model(data);
  const rsr::PriorSpec prior = cfg.prior();

  std::vector<rsr::PosteriorDraw> draws;
  double seconds = 0.0;
  if (method == "grsr") {
    rsr::GrsrResult r = rsr::run_grsr(data, model, prior, cfg.grsr, rsr::Rng(cfg.seed));
    draws = std::move(r.draws);
    seconds = r.seconds;
  } else {
    rsr::GibbsResult r = rsr::run_gibbs(data, model, prior, cfg.gibbs, rsr::Rng(cfg.seed));
    draws = std::move(r.draws);
    seconds = r.seconds;
  }

  const auto b = static_cast<rsr::Index>(draws.size());
  const rsr::Index n = data.n_obs();
  rsr::Matrix g(b, n);
  for (rsr::Index i = 0; i < b; ++i) g.row(i) = draws[static_cast<std::size_t>(i)].g.transpose();
  const rsr::ProjectionCache proj(data.x_obs);
  const rsr::TestResult test = rsr::hypothesis_test(g, proj, cfg.grsr.test_half_width);

  rsr::write_draws_csv(out / "draws.csv", draws);
  if (emit_g) rsr::write_g_csv(out / "g_draws.csv", draws);

  json summary;
  summary["method"] = method;
  summary["draws"] = draws.size();
  summary["seconds"] = seconds;
  summary["level"] = cfg.level;
  summary["delta"] = column_summary(rsr::stack_delta(draws), cfg.level);
  summary["beta"] = column_summary(rsr::stack_beta(draws), cfg.level);
  summary["sigma2"] = column_summary(scalar_column(draws, &rsr::HyperParams::sigma2), cfg.level)[0];
  summary["tau2"] = column_summary(scalar_column(draws, &rsr::HyperParams::tau2), cfg.level)[0];
  if (data.n_miss() > 0) summary["y_miss"] = column_summary(rsr::stack_y_miss(draws), cfg.level);
  summary["test"] = {{"posterior_prob_h0", test.posterior_prob_h0},
                     {"half_width", test.half_width},
                     {"decision", test.decision == rsr::TestDecision::AcceptNull ? "accept_null" : "reject_null"}};
  std::ofstream os(out / "summary.json");
  if (!os) throw rsr::Error(rsr::Errc::IoError, "cannot write " + (out / "summary.json").string());
  os << summary.dump(2) << '\n';
  std::cout << "wrote " << draws.size() << " draws to " << (out / "draws.csv").string() << " in " << seconds << "s\n";
  return 0;
}

int cmd_bench(const Common& common) {
  const rsr::RunConfig cfg = resolve(common);
  const fs::path out = prepare_out(cfg);
  const rsr::ExperimentReport report = rsr::run_experiment(cfg.experiment());
  rsr::write_report_csv(out / "report.csv", report);
  rsr::write_replicates_csv(out / "replicates.csv", report);
  std::cout << rsr::format_report_table(report);

  bool all_passed = true;
  for (const std::string& name : cfg.assertions) {
    rsr::CriterionCheck c;
    if (name == "equivalence") c = rsr::check_equivalence(report, cfg.test_alpha);
    else if (name == "baseline_ranges") c = rsr::check_baseline_ranges(report);
    else if (name == "scaled_claims") c = rsr::check_scaled_claims(report, cfg.test_alpha);
    else if (name == "all_rejected") c = rsr::check_all_rejected(report);
    else c = rsr::check_timing(report);
    all_passed = all_passed && c.passed;
    std::cout << (c.passed ? "PASS " : "FAIL ") << name << ": " << c.detail << '\n';
  }
  return all_passed ? 0 : kExitAcceptance;
}

int exit_code_for(rsr::Errc code) {
  switch (code) {
  case rsr::Errc::ConfigError:
  case rsr::Errc::IoError:
  case rsr::Errc::ShapeMismatch:
    return kExitConfig;
  default:
    return kExitNumeric;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Restricted spatial regression: simulate, fit and benchmark"};
  app.require_subcommand(1);
  Common common;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", common.out_dir, "Output directory (overrides output_dir)");
    sub->add_option("--seed", common.seed, "RNG seed (overrides seed)");
    sub->add_option("--threads", common.threads, "Worker threads (overrides threads)");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Generate a GQN dataset and its truth file");
  add_common(simulate);

  CLI::App* fit = app.add_subcommand("fit", "Sample the posterior for a dataset CSV");
  add_common(fit);
  std::string data_path;
  std::string method = "grsr";
  bool emit_g = false;
  fit->add_option("--data", data_path, "Dataset CSV (site,y,x1..xp)")->required()->check(CLI::ExistingFile);
  fit->add_option("--method", method, "grsr or gibbs")->check(CLI::IsMember({"grsr", "gibbs"}));
  fit->add_flag("--emit-g", emit_g, "Also write the g draws");

  CLI::App* bench = app.add_subcommand("bench", "Run the replicate study and evaluate configured checks");
  add_common(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(common);
    if (fit->parsed()) return cmd_fit(common, data_path, method, emit_g);
    return cmd_bench(common);
  } catch (const rsr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
