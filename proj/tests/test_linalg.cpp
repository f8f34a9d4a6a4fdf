#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "rsr/error.hpp"
#include "rsr/linalg.hpp"
#include "test_support.hpp"

using namespace rsr;
using rsr::testing::max_abs_diff;

namespace {

Matrix dense_projection(const Matrix& x) { return x * (x.transpose() * x).inverse() * x.transpose(); }

Matrix uniform_design(Index n, Index p, Rng& rng) {
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) x(i, j) = 2.0 * rng.uniform() - 1.0;
  return x;
}

} // namespace

TEST(Projection, InterceptIsTheMean) {
  const ProjectionCache proj(Matrix::Ones(2, 1));
  const Vector v = (Vector(2) << 1.0, 3.0).finished();
  EXPECT_NEAR(proj.project(v)[0], 2.0, 1e-14);
  EXPECT_NEAR(proj.project(v)[1], 2.0, 1e-14);
  EXPECT_NEAR(proj.residual(v)[0], -1.0, 1e-14);
  EXPECT_NEAR(proj.residual(v)[1], 1.0, 1e-14);
}

TEST(Projection, ComplementSignConvention) {
  const ProjectionCache proj(Matrix::Ones(2, 1));
  ASSERT_EQ(proj.complement().cols(), 1);
  EXPECT_NEAR(proj.complement()(0, 0), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(proj.complement()(1, 0), -1.0 / std::sqrt(2.0), 1e-14);
}

TEST(Projection, MatchesDenseOracle) {
  Rng rng(11);
  const Matrix x = uniform_design(10, 3, rng);
  const ProjectionCache proj(x);
  const Matrix p = dense_projection(x);
  const Matrix& l = proj.complement();
  EXPECT_LE((x.transpose() * l).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE(max_abs_diff(l * l.transpose(), Matrix::Identity(10, 10) - p), 1e-10);
  EXPECT_LE(max_abs_diff(l.transpose() * l, Matrix::Identity(7, 7)), 1e-10);
  for (int rep = 0; rep < 5; ++rep) {
    const Vector v = rng.normal_vector(10);
    EXPECT_LE(max_abs_diff(proj.project(v), p * v), 1e-10);
    EXPECT_LE(max_abs_diff(proj.residual(proj.residual(v)), proj.residual(v)), 1e-10);
    EXPECT_LE(max_abs_diff(l * (l.transpose() * v), proj.residual(v)), 1e-10);
    EXPECT_LE(max_abs_diff(proj.coefficients(v), (x.transpose() * x).ldlt().solve(x.transpose() * v)), 1e-10);
  }
  EXPECT_LE(max_abs_diff(proj.xtx_inv(), (x.transpose() * x).inverse()), 1e-10);
  for (Index j = 0; j < l.cols(); ++j) {
    Index first = 0;
    while (std::abs(l(first, j)) <= 1e-10) ++first;
    EXPECT_GT(l(first, j), 0.0);
  }
}

TEST(Projection, Errors) {
  Matrix dup(4, 2);
  dup.col(0).setOnes();
  dup.col(1).setOnes();
  try {
    build_projection_cache(dup);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RankDeficient);
  }
  try {
    build_projection_cache(Matrix::Ones(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DimensionError);
  }
}

TEST(Cholesky, Identity) {
  const SpdFactor f = chol_spd(Matrix::Identity(3, 3));
  EXPECT_LE(max_abs_diff(f.lower(), Matrix::Identity(3, 3)), 1e-15);
  EXPECT_NEAR(f.log_det(), 0.0, 1e-15);
  EXPECT_FALSE(f.jittered());
}

TEST(Cholesky, TwoByTwoClosedForm) {
  const Matrix m = (Matrix(2, 2) << 4, 2, 2, 3).finished();
  const SpdFactor f = chol_spd(m);
  const Matrix expected = (Matrix(2, 2) << 2, 0, 1, std::sqrt(2.0)).finished();
  EXPECT_LE(max_abs_diff(f.lower(), expected), 1e-14);
  EXPECT_LE((m - f.lower() * f.lower().transpose()).norm() / m.norm(), 1e-8);
  EXPECT_NEAR(f.log_det(), std::log(8.0), 1e-14);
  const Vector x = solve_spd(f, Vector(Vector::Unit(2, 0)));
  EXPECT_NEAR(x[0], 0.375, 1e-14);
  EXPECT_NEAR(x[1], -0.25, 1e-14);
}

TEST(Cholesky, PureJitter) {
  const SpdFactor f = chol_spd(Matrix::Zero(2, 2), 0.01);
  EXPECT_TRUE(f.jittered());
  EXPECT_LE(max_abs_diff(f.lower() * f.lower().transpose(), 0.01 * Matrix::Identity(2, 2)), 1e-15);
  EXPECT_NEAR(f.log_det(), 2.0 * std::log(0.01), 1e-12);
}

TEST(Cholesky, Solves) {
  EXPECT_LE(max_abs_diff(solve_spd(chol_spd(Matrix::Identity(2, 2)), Vector((Vector(2) << 5, -2).finished())),
                         (Vector(2) << 5, -2).finished()),
            1e-15);
  const Matrix d = Vector((Vector(2) << 2, 4).finished()).asDiagonal();
  const Vector x = solve_spd(chol_spd(d), Vector((Vector(2) << 2, 4).finished()));
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0, 1e-15);

  Rng rng(3);
  const Matrix m = rsr::testing::random_spd(8, rng);
  const SpdFactor f = chol_spd(m);
  const Vector b = rng.normal_vector(8);
  EXPECT_LE((m * f.solve(b) - b).norm(), 1e-8 * b.norm());
  EXPECT_NEAR(f.log_det(), std::log(m.determinant()), 1e-10);
  EXPECT_THROW(f.solve(Vector(3)), Error);
}

TEST(Cholesky, RejectsIndefiniteAndAsymmetric) {
  const Matrix indefinite = (Matrix(2, 2) << 1, 2, 2, 1).finished();
  try {
    chol_spd(indefinite);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotPositiveDefinite);
  }
  const Matrix asym = (Matrix(2, 2) << 1, 0.5, 0.0, 1).finished();
  EXPECT_THROW(chol_spd(asym), Error);
}

TEST(Spectral, ReconstructsAscending) {
  Rng rng(5);
  const Matrix m = rsr::testing::random_spd(6, rng);
  const SymmetricSpectrum s = spectral_decomposition(m);
  EXPECT_LE(max_abs_diff(s.vectors * s.values.asDiagonal() * s.vectors.transpose(), m), 1e-10);
  for (Index i = 1; i < s.values.size(); ++i) EXPECT_LE(s.values[i - 1], s.values[i]);
}

// Sherman-Morrison-Woodbury identities behind the reconfounding result,
// checked on dense inverses only.
TEST(Smw, IdentitiesOnRandomInstances) {
  Rng rng(2024);
  for (int inst = 0; inst < 50; ++inst) {
    const Index n = 3 + static_cast<Index>(rng.uniform() * 10.0);
    const Index p = 1 + static_cast<Index>(rng.uniform() * 2.0);
    const Matrix x = rsr::testing::random_matrix(n, p, rng);
    const Matrix sg = rsr::testing::random_spd(n, rng);
    const double s2 = 0.2 + 2.0 * rng.uniform();
    const double t2 = 0.2 + 2.0 * rng.uniform();
    const Matrix id = Matrix::Identity(n, n);
    const Matrix sy_inv = (t2 * s2 * sg + s2 * id).inverse();
    const Matrix p_sigma = x * (x.transpose() * sy_inv * x).inverse() * x.transpose();
    const Matrix xtx_inv = (x.transpose() * x).inverse();
    const Matrix p_ols = x * xtx_inv * x.transpose();

    const Matrix lhs1 = xtx_inv * x.transpose() * p_sigma * sy_inv * x * xtx_inv;
    EXPECT_LE(max_abs_diff(lhs1, xtx_inv), 1e-7);

    const Matrix lhs2 = ((id - p_ols) / s2 + sg.inverse() / (t2 * s2)).inverse();
    const Matrix rhs2 = s2 * id - s2 * s2 * sy_inv + p_sigma - s2 * p_sigma * sy_inv - s2 * sy_inv * p_sigma +
                        s2 * s2 * sy_inv * p_sigma * sy_inv;
    EXPECT_LE(max_abs_diff(lhs2, rhs2), 1e-7);
  }
}
