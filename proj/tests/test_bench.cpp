#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "rsr/bench.hpp"

using namespace rsr;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c = default_experiment(Scenario::Baseline);
  c.n_reps = 2;
  c.gqn.n = 40;
  c.prior = PriorSpec{1.0, 1.0, HyperGrid::tau2_range(0.01, 3.0, 30)};
  c.model = CovarianceModel::bspline(6);
  c.grsr_draws = 30;
  c.gibbs = GibbsOptions{120, 60, 2, 1};
  return c;
}

} // namespace

TEST(Bench, SmokeReport) {
  const ExperimentReport r = run_experiment(small_config());
  EXPECT_EQ(r.n_reps, 2u);
  EXPECT_EQ(r.replicates.size(), 2u);
  for (Method m : {Method::Slmm, Method::Trsr, Method::Grsr}) {
    ASSERT_TRUE(r.has(m));
    EXPECT_TRUE(r.summary_of(m).se.has_value());
    for (double v : r.column(m, Metric::CoverageDelta)) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_EQ(r.null_accepted + r.null_rejected, 2u);
  // TRSR and GRSR share their draws, so the delta side is identical.
  EXPECT_EQ(r.column(Method::Trsr, Metric::RmseDelta), r.column(Method::Grsr, Metric::RmseDelta));
  EXPECT_EQ(r.column(Method::Trsr, Metric::Mspe), r.column(Method::Grsr, Metric::Mspe));
  EXPECT_FALSE(format_report_table(r).empty());

  const auto dir = std::filesystem::temp_directory_path() / "rsr_test_bench";
  std::filesystem::create_directories(dir);
  write_report_csv(dir / "report.csv", r);
  write_replicates_csv(dir / "replicates.csv", r);
  std::ifstream in(dir / "replicates.csv");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 1 + 2 * 3);
}

TEST(Bench, SingleReplicateHasNoSe) {
  ExperimentConfig c = small_config();
  c.n_reps = 1;
  c.methods = {Method::Grsr};
  const ExperimentReport r = run_experiment(c);
  EXPECT_FALSE(r.summary_of(Method::Grsr).se.has_value());
}

TEST(Bench, ThreadCountDoesNotChangeResults) {
  ExperimentConfig c = small_config();
  c.methods = {Method::Grsr, Method::Slmm};
  const ExperimentReport a = run_experiment(c);
  c.threads = 2;
  c.gibbs.threads = 2;
  const ExperimentReport b = run_experiment(c);
  EXPECT_EQ(a.column(Method::Grsr, Metric::RmseDelta), b.column(Method::Grsr, Metric::RmseDelta));
  EXPECT_EQ(a.column(Method::Slmm, Metric::Mspe), b.column(Method::Slmm, Metric::Mspe));
}

TEST(Bench, ChecksReportMissingMethods) {
  ExperimentConfig c = small_config();
  c.methods = {Method::Grsr};
  const ExperimentReport r = run_experiment(c);
  EXPECT_FALSE(check_equivalence(r).passed);
  EXPECT_FALSE(check_baseline_ranges(r).passed);
  EXPECT_FALSE(check_timing(r).passed);
}
