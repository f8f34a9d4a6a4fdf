#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "rsr/error.hpp"
#include "rsr/model.hpp"
#include "test_support.hpp"

using namespace rsr;
using rsr::testing::max_abs_diff;

TEST(Dataset, Validation) {
  const Vector y = (Vector(3) << 1, 2, 3).finished();
  const Vector sites = rsr::testing::unit_sites(3);
  const SpatialDataset d = validate_dataset(y, Matrix::Ones(3, 1), sites, Vector(), Matrix(0, 1));
  EXPECT_EQ(d.n_obs(), 3);
  EXPECT_EQ(d.n_miss(), 0);

  Vector bad = y;
  bad[1] = std::nan("");
  try {
    validate_dataset(bad, Matrix::Ones(3, 1), sites, Vector(), Matrix(0, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonFinite);
  }
  Matrix dup(3, 2);
  dup.col(0) = sites;
  dup.col(1) = sites;
  try {
    validate_dataset(y, dup, sites, Vector(), Matrix(0, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RankDeficient);
  }
  try {
    validate_dataset(y, Matrix::Ones(2, 1), sites, Vector(), Matrix(0, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ShapeMismatch);
  }
}

TEST(Grid, Tau2RangeAndMedian) {
  const HyperGrid g = HyperGrid::tau2_range(0.01, 3.0, 1000);
  ASSERT_EQ(g.size(), 1000u);
  EXPECT_DOUBLE_EQ(g[0].tau2, 0.01);
  EXPECT_DOUBLE_EQ(g[999].tau2, 3.0);
  EXPECT_NEAR(g[1].tau2 - g[0].tau2, 0.003, 1e-5);
  EXPECT_EQ(g.median_index(), 499u);
  const HyperGrid gg = HyperGrid::tau2_range(1.0, 2.0, 2, {0.1, 0.2});
  ASSERT_EQ(gg.size(), 4u);
  EXPECT_DOUBLE_EQ(gg[1].tau2, 1.0);
  EXPECT_DOUBLE_EQ(*gg[1].gamma, 0.2);
  PriorSpec bad{0.0, 1.0, g};
  EXPECT_THROW(bad.validate(), Error);
  PriorSpec empty{1.0, 1.0, HyperGrid()};
  EXPECT_THROW(empty.validate(), Error);
}

TEST(Lram, Examples) {
  const ProjectionCache proj(Matrix::Ones(2, 1));
  const Vector g = (Vector(2) << 2, 4).finished();
  EXPECT_NEAR(lram_forward(Vector::Zero(1), g, proj)[0], 3.0, 1e-15);
  EXPECT_NEAR(lram_inverse(Vector::Constant(1, 3.0), g, proj)[0], 0.0, 1e-15);
  const Vector orth = (Vector(2) << 1, -1).finished();
  EXPECT_NEAR(lram_forward(Vector::Constant(1, 0.7), orth, proj)[0], 0.7, 1e-15);
  EXPECT_NEAR(lram_inverse(Vector::Constant(1, 0.7), Vector::Zero(2), proj)[0], 0.7, 1e-15);
  EXPECT_THROW(lram_forward(Vector::Zero(2), g, proj), Error);
}

TEST(Lram, RoundTripAndUnitJacobian) {
  Rng rng(6);
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 4 + rep % 5;
    const Matrix x = rsr::testing::random_design(n, rng);
    const ProjectionCache proj(x);
    const Vector beta = rng.normal_vector(2);
    const Vector g = rng.normal_vector(n);
    const Vector delta = lram_forward(beta, g, proj);
    EXPECT_LE(max_abs_diff(lram_inverse(delta, g, proj), beta), 1e-12);
    EXPECT_LE(max_abs_diff(lram_forward(lram_inverse(delta, g, proj), g, proj), delta), 1e-12);

    // Jacobian of (beta, g) -> (delta, g), assembled column by column from the
    // map itself (it is affine, so unit perturbations are exact).
    const Index d = 2 + n;
    Matrix jac(d, d);
    for (Index j = 0; j < d; ++j) {
      Vector b2 = beta, g2 = g;
      if (j < 2) b2[j] += 1.0;
      else g2[j - 2] += 1.0;
      jac.col(j).head(2) = lram_forward(b2, g2, proj) - delta;
      jac.col(j).tail(n) = g2 - g;
    }
    EXPECT_NEAR(jac.determinant(), 1.0, 1e-10);
    Matrix block = Matrix::Identity(d, d);
    block.topRightCorner(2, n) = -(x.transpose() * x).inverse() * x.transpose();
    EXPECT_NEAR(block.determinant(), 1.0, 1e-10);
  }
}

TEST(PosteriorDraw, ReconstructionIdentity) {
  Rng rng(12);
  const Matrix x = rsr::testing::random_design(7, rng);
  const ProjectionCache proj(x);
  const Vector g = rng.normal_vector(7);
  const PosteriorDraw a = PosteriorDraw::from_deconfounded(rng.normal_vector(2), g, proj, {});
  EXPECT_LE(max_abs_diff(a.beta + proj.xtx_inv() * x.transpose() * a.g, a.delta), 1e-12);
  const PosteriorDraw b = PosteriorDraw::from_confounded(rng.normal_vector(2), g, proj, {});
  EXPECT_LE(max_abs_diff(b.beta + proj.xtx_inv() * x.transpose() * b.g, b.delta), 1e-12);
}
