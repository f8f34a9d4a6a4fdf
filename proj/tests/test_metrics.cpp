#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>

#include "rsr/error.hpp"
#include "rsr/metrics.hpp"
#include "test_support.hpp"

using namespace rsr;

TEST(Rmse, Definition) {
  EXPECT_EQ(rmse(Vector::Ones(2), Vector::Ones(2)), 0.0);
  EXPECT_NEAR(rmse(Vector::Zero(2), (Vector(2) << 3, 4).finished()), std::sqrt(12.5), 1e-14);
  Rng rng(1);
  const Vector a = rng.normal_vector(5), b = rng.normal_vector(5);
  EXPECT_NEAR(rmse(a, b), std::sqrt((a - b).squaredNorm() / 5.0), 1e-12);
  EXPECT_THROW(rmse(Vector::Zero(2), Vector::Zero(3)), Error);
}

TEST(Mspe, Definition) {
  EXPECT_EQ(mspe(Vector::Ones(20), Vector::Ones(20)), 0.0);
  EXPECT_NEAR(mspe(Vector::Zero(20), Vector::Ones(20)), 1.0, 1e-15);
  EXPECT_THROW(mspe(Vector::Zero(2), Vector::Zero(3)), Error);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(sample_quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(sample_quantile({5, 1, 3}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(sample_quantile({5, 1, 3}, 1.0), 5.0);
}

TEST(Coverage, Examples) {
  const Vector truth = (Vector(2) << 1.0, -2.0).finished();
  Matrix same(25, 2);
  same.rowwise() = truth.transpose();
  EXPECT_EQ(coverage(same, truth), 1.0);
  EXPECT_EQ(coverage(same, Vector(truth.array() + 100.0)), 0.0);
  Matrix sym(10000, 2);
  for (Index b = 0; b < 10000; ++b) sym.row(b) = truth.transpose().array() + (b % 2 ? 1.0 : -1.0) * (b / 2) * 1e-3;
  EXPECT_EQ(coverage(sym, truth), 1.0);
  try {
    coverage(Matrix::Zero(19, 2), truth);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InsufficientDraws);
  }
}

TEST(PairedT, DegenerateCases) {
  const std::vector<double> a{1, 2, 3};
  const PairedTest same = paired_t_test(a, a);
  EXPECT_FALSE(same.significant);
  EXPECT_EQ(same.p_value, 1.0);
  const PairedTest shift = paired_t_test({2, 3, 4}, a);
  EXPECT_TRUE(shift.degenerate);
  EXPECT_FALSE(shift.significant);
  EXPECT_EQ(shift.p_value, 1.0);
}

TEST(PairedT, StrongShift) {
  Rng rng(2);
  std::vector<double> a(100), b(100, 0.0);
  for (double& v : a) v = 1.0 + 0.1 * rng.normal();
  const PairedTest t = paired_t_test(a, b);
  EXPECT_LT(t.p_value, 1e-10);
  EXPECT_TRUE(t.significant);
}

TEST(PairedT, MatchesTDistribution) {
  const std::vector<double> a{0.3, -0.1, 0.5, 0.2, 0.4, -0.2};
  const std::vector<double> b(6, 0.0);
  const double m = (0.3 - 0.1 + 0.5 + 0.2 + 0.4 - 0.2) / 6.0;
  double ss = 0.0;
  for (double v : a) ss += (v - m) * (v - m);
  const double se = std::sqrt(ss / 5.0 / 6.0);
  const boost::math::students_t dist(5.0);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, m / se));
  const PairedTest t = paired_t_test(a, b, 0.05, 3);
  EXPECT_NEAR(t.t, m / se, 1e-12);
  EXPECT_NEAR(t.p_value, p, 1e-12);
  EXPECT_EQ(t.significant, p < 0.05 / 3.0);
}

TEST(ReplicateMetrics, IdenticalDrawsGiveIdenticalMetrics) {
  Rng rng(3);
  const Matrix x = rsr::testing::random_design(8, rng);
  const ProjectionCache proj(x);
  std::vector<PosteriorDraw> draws;
  for (int b = 0; b < 30; ++b)
    draws.push_back(PosteriorDraw::from_deconfounded(rng.normal_vector(2), rng.normal_vector(8), proj, {},
                                                     rng.normal_vector(3)));
  const Vector dt = rng.normal_vector(2), bt = rng.normal_vector(2), yt = rng.normal_vector(3);
  const ReplicateMetrics a = replicate_metrics(draws, dt, bt, yt, false, 0.1);
  const ReplicateMetrics b = replicate_metrics(draws, dt, bt, yt, false, 0.1);
  EXPECT_EQ(a.rmse_delta, b.rmse_delta);
  EXPECT_EQ(a.mspe, b.mspe);
  EXPECT_EQ(a.coverage_beta, b.coverage_beta);
  const ReplicateMetrics trsr = replicate_metrics(draws, dt, bt, yt, true, 0.1);
  EXPECT_EQ(trsr.rmse_beta, rmse(bt, stack_delta(draws).colwise().mean().transpose()));
  const Matrix y = stack_y_miss(draws);
  double v = 0.0;
  for (Index j = 0; j < y.cols(); ++j) {
    const double m = y.col(j).mean();
    v += (y.col(j).array() - m).square().sum() / (y.rows() - 1.0);
  }
  EXPECT_NEAR(a.mean_pred_var, v / static_cast<double>(y.cols()), 1e-12);
}
