#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "rsr/dataset_io.hpp"
#include "rsr/draws_io.hpp"
#include "rsr/error.hpp"
#include "rsr/gqn.hpp"
#include "test_support.hpp"

using namespace rsr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rsr_test_io";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

} // namespace

TEST(Numbers, ShortestRoundTrip) {
  for (double v : {0.1, -1.0 / 3.0, 1e-300, 123456789.125, 0.0}) EXPECT_EQ(parse_number(format_number(v)), v);
  EXPECT_THROW(parse_number("1.5x"), Error);
  EXPECT_THROW(parse_number(""), Error);
}

TEST(DatasetCsv, RoundTrip) {
  Rng rng(1);
  const SpatialDataset d = rsr::testing::toy_dataset(9, 3, rng);
  const fs::path p = scratch("round.csv");
  write_dataset_csv(p, d);
  const SpatialDataset back = read_dataset_csv(p);
  ASSERT_EQ(back.n_obs(), d.n_obs());
  ASSERT_EQ(back.n_miss(), d.n_miss());
  EXPECT_EQ(back.y_obs, d.y_obs);
  EXPECT_EQ(back.x_obs, d.x_obs);
  EXPECT_EQ(back.obs_sites, d.obs_sites);
  EXPECT_EQ(back.miss_sites, d.miss_sites);
  EXPECT_EQ(back.x_miss, d.x_miss);
}

TEST(DatasetCsv, Errors) {
  const fs::path p = scratch("bad.csv");
  write_text(p, "site,resp,x1\n0,1,1\n");
  EXPECT_THROW(read_dataset_csv(p), Error);
  write_text(p, "site,y,x1\n0,1\n");
  EXPECT_THROW(read_dataset_csv(p), Error);
  write_text(p, "site,y,x1\n0,abc,1\n");
  EXPECT_THROW(read_dataset_csv(p), Error);
  EXPECT_THROW(read_dataset_csv(scratch("does_not_exist.csv")), Error);
}

TEST(DrawsCsv, RoundTrip) {
  Rng rng(2);
  const Matrix x = rsr::testing::random_design(6, rng);
  const ProjectionCache proj(x);
  std::vector<PosteriorDraw> draws;
  for (int b = 0; b < 4; ++b) {
    HyperParams th{0.5 + b, 1.5, b % 2 ? std::optional<double>(0.3) : std::nullopt};
    draws.push_back(PosteriorDraw::from_deconfounded(rng.normal_vector(2), rng.normal_vector(6), proj, th,
                                                     rng.normal_vector(3)));
  }
  const fs::path p = scratch("draws.csv");
  write_draws_csv(p, draws);
  const auto back = read_draws_csv(p);
  ASSERT_EQ(back.size(), draws.size());
  for (std::size_t b = 0; b < draws.size(); ++b) {
    EXPECT_EQ(back[b].delta, draws[b].delta);
    EXPECT_EQ(back[b].beta, draws[b].beta);
    EXPECT_EQ(back[b].y_miss, draws[b].y_miss);
    EXPECT_EQ(back[b].theta.sigma2, draws[b].theta.sigma2);
    EXPECT_EQ(back[b].theta.gamma.has_value(), draws[b].theta.gamma.has_value());
  }
  const fs::path pg = scratch("g.csv");
  write_g_csv(pg, draws);
  const Matrix g = read_g_csv(pg);
  ASSERT_EQ(g.rows(), 4);
  for (Index b = 0; b < 4; ++b) EXPECT_EQ(Vector(g.row(b).transpose()), draws[static_cast<std::size_t>(b)].g);
}

TEST(TruthJson, RoundTrip) {
  GqnConfig cfg;
  cfg.n = 40;
  const SimulatedData sim = simulate_dataset(cfg, Rng(3));
  const fs::path p = scratch("truth.json");
  write_truth_json(p, sim.truth);
  const SimTruth back = read_truth_json(p);
  EXPECT_EQ(back.beta_true, sim.truth.beta_true);
  EXPECT_EQ(back.delta_true, sim.truth.delta_true);
  EXPECT_EQ(back.sigma2_true, sim.truth.sigma2_true);
  EXPECT_EQ(back.missing_mask, sim.truth.missing_mask);
  EXPECT_EQ(back.y_full, sim.truth.y_full);
}
