#include "rsr/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "rsr/dataset_io.hpp"
#include "rsr/error.hpp"
#include "rsr/parallel.hpp"

namespace rsr {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::Slmm: return "SLMM";
    case Method::Trsr: return "TRSR";
    case Method::Grsr: return "GRSR";
  }
  return "?";
}

std::string_view to_string(Scenario s) noexcept { return s == Scenario::Baseline ? "baseline" : "scaled"; }

std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::RmseDelta: return "rmse_delta";
    case Metric::RmseBeta: return "rmse_beta";
    case Metric::Mspe: return "mspe";
    case Metric::MeanPredVar: return "mean_pred_var";
    case Metric::CpuSeconds: return "cpu_seconds";
    case Metric::CoverageDelta: return "coverage_delta";
    case Metric::CoverageBeta: return "coverage_beta";
  }
  return "?";
}

const std::vector<Metric>& all_metrics() {
  static const std::vector<Metric> m{Metric::RmseDelta,  Metric::RmseBeta,      Metric::Mspe,        Metric::MeanPredVar,
                                     Metric::CpuSeconds, Metric::CoverageDelta, Metric::CoverageBeta};
  return m;
}

double metric_value(const ReplicateMetrics& r, Metric m) {
  switch (m) {
    case Metric::RmseDelta: return r.rmse_delta;
    case Metric::RmseBeta: return r.rmse_beta;
    case Metric::Mspe: return r.mspe;
    case Metric::MeanPredVar: return r.mean_pred_var;
    case Metric::CpuSeconds: return r.cpu_seconds;
    case Metric::CoverageDelta: return r.coverage_delta;
    case Metric::CoverageBeta: return r.coverage_beta;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

void set_metric(ReplicateMetrics& r, Metric m, double v) {
  switch (m) {
    case Metric::RmseDelta: r.rmse_delta = v; break;
    case Metric::RmseBeta: r.rmse_beta = v; break;
    case Metric::Mspe: r.mspe = v; break;
    case Metric::MeanPredVar: r.mean_pred_var = v; break;
    case Metric::CpuSeconds: r.cpu_seconds = v; break;
    case Metric::CoverageDelta: r.coverage_delta = v; break;
    case Metric::CoverageBeta: r.coverage_beta = v; break;
  }
}

bool contains(const std::vector<Method>& ms, Method m) { return std::find(ms.begin(), ms.end(), m) != ms.end(); }

std::string fixed(double v, int digits = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

ReplicateResult run_replicate(const ExperimentConfig& config, const GqnConfig& gqn, std::size_t rep) {
  const Rng root = Rng(config.seed).split(rep);
  const SimulatedData sim = simulate_dataset(gqn, root.split(0));
  Vector y_miss_true(sim.data.n_miss());
  for (std::size_t i = 0, k = 0; i < sim.truth.missing_mask.size(); ++i) {
    if (sim.truth.missing_mask[i]) y_miss_true[static_cast<Index>(k++)] = sim.truth.y_full[static_cast<Index>(i)];
  }
  ReplicateResult out;
  out.rep = rep;
  out.sigma2_true = sim.truth.sigma2_true;

  if (contains(config.methods, Method::Grsr) || contains(config.methods, Method::Trsr)) {
    GrsrOptions opt;
    opt.draws = config.grsr_draws;
    opt.test_half_width = config.test_half_width;
    const GrsrResult fit = run_grsr(sim.data, config.model, config.prior, opt, root.split(1));
    out.test = fit.test;
    for (Method m : {Method::Trsr, Method::Grsr}) {
      if (!contains(config.methods, m)) continue;
      out.methods.push_back({m, replicate_metrics(fit.draws, sim.truth.delta_true, sim.truth.beta_true, y_miss_true,
                                                  m == Method::Trsr, fit.seconds, config.level)});
    }
  }
  if (contains(config.methods, Method::Slmm)) {
    GibbsOptions opt = config.gibbs;
    opt.threads = 1;
    const GibbsResult fit = run_gibbs(sim.data, config.model, config.prior, opt, root.split(2));
    out.methods.push_back({Method::Slmm, replicate_metrics(fit.draws, sim.truth.delta_true, sim.truth.beta_true,
                                                           y_miss_true, false, fit.seconds, config.level)});
  }
  return out;
}

} // namespace

const ReplicateMetrics& ReplicateResult::at(Method m) const {
  for (const auto& mm : methods)
    if (mm.method == m) return mm.metrics;
  throw Error(Errc::DimensionError, "replicate has no results for " + std::string(to_string(m)));
}

std::vector<double> ExperimentReport::column(Method m, Metric metric) const {
  std::vector<double> out;
  out.reserve(replicates.size());
  for (const auto& r : replicates) out.push_back(metric_value(r.at(m), metric));
  return out;
}

const MethodSummary& ExperimentReport::summary_of(Method m) const {
  for (const auto& s : summary)
    if (s.method == m) return s;
  throw Error(Errc::DimensionError, "report has no summary for " + std::string(to_string(m)));
}

bool ExperimentReport::has(Method m) const { return contains(methods, m); }

ExperimentConfig default_experiment(Scenario scenario) {
  ExperimentConfig c;
  c.scenario = scenario;
  c.gqn = scenario_config(scenario);
  return c;
}

ExperimentReport summarize(Scenario scenario, const std::vector<Method>& methods,
                           std::vector<ReplicateResult> replicates) {
  ExperimentReport report;
  report.scenario = scenario;
  report.methods = methods;
  report.n_reps = replicates.size();
  report.replicates = std::move(replicates);
  for (const auto& r : report.replicates) {
    if (!r.test) continue;
    if (r.test->decision == TestDecision::AcceptNull) ++report.null_accepted;
    else ++report.null_rejected;
  }
  const Method order[] = {Method::Slmm, Method::Trsr, Method::Grsr};
  for (Method m : order) {
    if (!contains(methods, m)) continue;
    MethodSummary s{m, {}, std::nullopt};
    ReplicateMetrics se;
    for (Metric metric : all_metrics()) {
      const std::vector<double> col = report.column(m, metric);
      const double n = static_cast<double>(col.size());
      double mean = 0.0;
      for (double v : col) mean += v;
      mean /= n;
      double ss = 0.0;
      for (double v : col) ss += (v - mean) * (v - mean);
      set_metric(s.mean, metric, mean);
      if (col.size() > 1) set_metric(se, metric, std::sqrt(ss / (n - 1.0)) / std::sqrt(n));
    }
    if (report.n_reps > 1) s.se = se;
    report.summary.push_back(s);
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.n_reps < 1) throw Error(Errc::ConfigError, "n_reps must be at least 1");
  if (config.methods.empty()) throw Error(Errc::ConfigError, "no methods selected");
  config.prior.validate();
  GqnConfig gqn = config.gqn;
  gqn.omega_scaled = config.scenario == Scenario::Scaled;

  std::vector<ReplicateResult> reps(config.n_reps);
  parallel_for(config.n_reps, config.threads, [&](std::size_t r) { reps[r] = run_replicate(config, gqn, r); });
  return summarize(config.scenario, config.methods, std::move(reps));
}

void write_report_csv(const std::filesystem::path& path, const ExperimentReport& report) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << "scenario,method,metric,mean,se\n";
  for (const auto& s : report.summary) {
    for (Metric m : all_metrics()) {
      out << to_string(report.scenario) << ',' << to_string(s.method) << ',' << to_string(m) << ','
          << format_number(metric_value(s.mean, m)) << ',';
      if (s.se) out << format_number(metric_value(*s.se, m));
      out << '\n';
    }
  }
  if (!out) throw Error(Errc::IoError, "failed writing " + path.string());
}

void write_replicates_csv(const std::filesystem::path& path, const ExperimentReport& report) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  out << "rep,method,sigma2_true,prob_h0,decision";
  for (Metric m : all_metrics()) out << ',' << to_string(m);
  out << '\n';
  for (const auto& r : report.replicates) {
    for (const auto& mm : r.methods) {
      out << r.rep << ',' << to_string(mm.method) << ',' << format_number(r.sigma2_true) << ',';
      if (r.test) {
        out << format_number(r.test->posterior_prob_h0) << ','
            << (r.test->decision == TestDecision::AcceptNull ? "accept" : "reject");
      } else {
        out << ',';
      }
      for (Metric m : all_metrics()) out << ',' << format_number(metric_value(mm.metrics, m));
      out << '\n';
    }
  }
  if (!out) throw Error(Errc::IoError, "failed writing " + path.string());
}

std::string format_report_table(const ExperimentReport& report) {
  std::ostringstream os;
  os << "scenario " << to_string(report.scenario) << ", " << report.n_reps << " replicates\n";
  constexpr int w0 = 16;
  constexpr int w = 20;
  os << std::left << std::setw(w0) << "metric";
  for (const auto& s : report.summary) os << std::setw(w) << to_string(s.method);
  os << '\n';
  for (Metric m : all_metrics()) {
    os << std::setw(w0) << to_string(m);
    for (const auto& s : report.summary) {
      std::string cell = fixed(metric_value(s.mean, m));
      if (s.se) cell += " (" + fixed(metric_value(*s.se, m)) + ")";
      os << std::setw(w) << cell;
    }
    os << '\n';
  }
  if (report.null_accepted + report.null_rejected > 0) {
    os << "hypothesis test: null accepted " << report.null_accepted << ", rejected " << report.null_rejected << '\n';
  }
  return os.str();
}

CriterionCheck check_equivalence(const ExperimentReport& report, double alpha) {
  CriterionCheck c{"GRSR vs SLMM equivalence", true, ""};
  if (!report.has(Method::Grsr) || !report.has(Method::Slmm)) {
    return {c.name, false, "report lacks GRSR or SLMM"};
  }
  std::ostringstream os;
  for (Metric m : {Metric::Mspe, Metric::RmseDelta, Metric::MeanPredVar}) {
    const PairedTest t = paired_t_test(report.column(Method::Grsr, m), report.column(Method::Slmm, m), alpha, 3);
    const bool small = std::abs(t.mean_diff) <= 2.0 * t.se;
    const bool ok = !t.significant && small;
    c.passed = c.passed && ok;
    os << to_string(m) << ": diff=" << fixed(t.mean_diff, 5) << " se=" << fixed(t.se, 5) << " p=" << fixed(t.p_value, 4)
       << (ok ? "" : " FAIL") << "; ";
  }
  c.detail = os.str();
  return c;
}

CriterionCheck check_baseline_ranges(const ExperimentReport& report) {
  CriterionCheck c{"baseline scenario ranges", false, ""};
  if (!report.has(Method::Grsr) || !report.has(Method::Trsr)) return {c.name, false, "report lacks GRSR or TRSR"};
  const ReplicateMetrics& g = report.summary_of(Method::Grsr).mean;
  const ReplicateMetrics& t = report.summary_of(Method::Trsr).mean;
  const bool rmse_ok = g.rmse_delta >= 0.15 && g.rmse_delta <= 0.28;
  const bool cov_ok = g.coverage_delta >= 0.80 && g.coverage_delta <= 0.97;
  const bool gap_ok = g.coverage_beta - t.coverage_beta >= 0.15;
  const bool mspe_ok = g.mspe >= 0.75 && g.mspe <= 1.00;
  c.passed = rmse_ok && cov_ok && gap_ok && mspe_ok;
  std::ostringstream os;
  os << "rmse_delta=" << fixed(g.rmse_delta) << (rmse_ok ? "" : " (want [0.15,0.28])")
     << " coverage_delta=" << fixed(g.coverage_delta) << (cov_ok ? "" : " (want [0.80,0.97])")
     << " coverage_beta GRSR=" << fixed(g.coverage_beta) << " TRSR=" << fixed(t.coverage_beta)
     << (gap_ok ? "" : " (want gap >= 0.15)") << " mspe=" << fixed(g.mspe) << (mspe_ok ? "" : " (want [0.75,1.00])");
  c.detail = os.str();
  return c;
}

CriterionCheck check_scaled_claims(const ExperimentReport& report, double alpha) {
  CriterionCheck c{"scaled scenario claims", false, ""};
  if (!report.has(Method::Grsr) || !report.has(Method::Trsr)) return {c.name, false, "report lacks GRSR or TRSR"};
  const auto needed = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(report.n_reps) - 1e-9));
  const bool accept_ok = report.null_accepted >= needed;
  const ReplicateMetrics& g = report.summary_of(Method::Grsr).mean;
  const bool cov_ok = g.coverage_beta >= 0.90;
  const PairedTest t = paired_t_test(report.column(Method::Trsr, Metric::CoverageBeta),
                                     report.column(Method::Grsr, Metric::CoverageBeta), alpha, 3);
  const bool below_ok = t.significant && t.mean_diff < 0.0;
  c.passed = accept_ok && cov_ok && below_ok;
  std::ostringstream os;
  os << "null accepted " << report.null_accepted << "/" << report.n_reps << (accept_ok ? "" : " (want >= 95%)")
     << " coverage_beta GRSR=" << fixed(g.coverage_beta) << (cov_ok ? "" : " (want >= 0.90)")
     << " TRSR-GRSR diff=" << fixed(t.mean_diff) << " p=" << std::setprecision(3) << t.p_value
     << (below_ok ? "" : " (want significantly below)");
  c.detail = os.str();
  return c;
}

CriterionCheck check_all_rejected(const ExperimentReport& report) {
  CriterionCheck c{"null rejected in every replicate", false, ""};
  c.passed = report.null_rejected == report.n_reps && report.n_reps > 0;
  c.detail = "rejected " + std::to_string(report.null_rejected) + "/" + std::to_string(report.n_reps);
  return c;
}

CriterionCheck check_timing(const ExperimentReport& report, double max_ratio) {
  CriterionCheck c{"GRSR vs Gibbs wall clock", false, ""};
  if (!report.has(Method::Grsr) || !report.has(Method::Slmm)) return {c.name, false, "report lacks GRSR or SLMM"};
  const double g = report.summary_of(Method::Grsr).mean.cpu_seconds;
  const double s = report.summary_of(Method::Slmm).mean.cpu_seconds;
  const double ratio = s > 0.0 ? g / s : std::numeric_limits<double>::infinity();
  c.passed = ratio <= max_ratio;
  c.detail = "GRSR " + fixed(g, 4) + "s, Gibbs " + fixed(s, 4) + "s, ratio " + fixed(ratio) +
             (c.passed ? "" : " (want <= " + fixed(max_ratio, 2) + ")");
  return c;
}

} // namespace rsr
