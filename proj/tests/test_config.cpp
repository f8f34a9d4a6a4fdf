#include <gtest/gtest.h>

#include "rsr/config.hpp"
#include "rsr/error.hpp"

using namespace rsr;

namespace {

std::string error_message(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "accepted: " << text;
  return {};
}

} // namespace

TEST(Config, DefaultsMatchReferenceStudy) {
  const RunConfig c = parse_run_config("{}");
  EXPECT_EQ(c.alpha, 1.0);
  EXPECT_EQ(c.kappa, 1.0);
  EXPECT_EQ(c.tau2_min, 0.01);
  EXPECT_EQ(c.tau2_max, 3.0);
  EXPECT_EQ(c.grid_k, 1000u);
  EXPECT_EQ(c.grsr.draws, 100u);
  EXPECT_EQ(c.grsr.test_half_width, 0.25);
  EXPECT_EQ(c.gibbs.iters, 2000u);
  EXPECT_EQ(c.gibbs.burn_in, 1000u);
  EXPECT_EQ(c.gibbs.thin, 10u);
  EXPECT_EQ(c.model.family, "bspline");
  EXPECT_EQ(c.model.rank, 10);
  EXPECT_EQ(c.simulation.n, 200u);
}

TEST(Config, UnknownKeysAreNamed) {
  EXPECT_NE(error_message(R"({"bogus": 1})").find("bogus"), std::string::npos);
  EXPECT_NE(error_message(R"({"grid": {"tau": 1}})").find("tau"), std::string::npos);
  EXPECT_NE(error_message(R"({"simulation": {"steps": 3}})").find("steps"), std::string::npos);
}

TEST(Config, SchemaViolations) {
  error_message("not json");
  error_message(R"({"scenario": "other"})");
  error_message(R"({"grid": {"K": 0}})");
  error_message(R"({"model": {"family": "exponential"}})");
  error_message(R"({"model": {"family": "bspline"}, "grid": {"gamma": [0.1]}})");
  error_message(R"({"bench": {"assert": ["nonsense"]}})");
  error_message(R"({"prior": {"alpha": -1}})");
}

TEST(Config, Overrides) {
  const RunConfig c = parse_run_config(R"({
    "seed": 7, "scenario": "scaled",
    "model": {"family": "exponential", "nugget": 0.01},
    "grid": {"tau2_min": 0.1, "tau2_max": 1.0, "K": 5, "gamma": [0.1, 0.2]},
    "gibbs": {"iters": 10, "burn_in": 0, "thin": 1},
    "bench": {"n_reps": 3, "methods": ["grsr"], "assert": ["scaled_claims"]}
  })");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.scenario, Scenario::Scaled);
  EXPECT_EQ(c.prior().grid.size(), 10u);
  EXPECT_EQ(c.n_reps, 3u);
  ASSERT_EQ(c.methods.size(), 1u);
  EXPECT_EQ(c.methods[0], Method::Grsr);
  const ExperimentConfig e = c.experiment();
  EXPECT_TRUE(e.gqn.omega_scaled);
  EXPECT_EQ(e.model.kind(), CovarianceKind::Exponential);
}
