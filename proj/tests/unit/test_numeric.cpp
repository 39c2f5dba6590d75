#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "bartree/distributions.hpp"
#include "bartree/linalg.hpp"
#include "bartree/numeric.hpp"
#include "test_support.hpp"

using namespace bartree;

TEST(CompensatedSum, RecoversCancelledTerms) {
  CompensatedSum s;
  s += 1.0;
  s += 1e100;
  s += 1.0;
  s += -1e100;
  EXPECT_EQ(s.value(), 2.0);

  CompensatedSum t;
  double naive = 0.0;
  for (int i = 0; i < 1'000'000; ++i) {
    t += 0.1;
    naive += 0.1;
  }
  EXPECT_NEAR(t.value(), 100000.0, 1e-9);
  EXPECT_GT(std::abs(naive - 100000.0), 1e-7);
}

TEST(CompensatedSum, MergesPartials) {
  CompensatedSum a, b, all;
  for (int i = 0; i < 1000; ++i) {
    const double x = 1.0 / (i + 1.0);
    (i % 2 ? a : b) += x;
    all += x;
  }
  a += b;
  EXPECT_NEAR(a.value(), all.value(), 1e-15);
}

TEST(Statistics, BasicSummaries) {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(mean(xs), 2.5);
  EXPECT_DOUBLE_EQ(sample_variance(xs), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(median(xs), 2.5);
  EXPECT_DOUBLE_EQ(median(std::vector<double>{3.0, 1.0, 2.0}), 2.0);
  const std::vector<double> ys{2.0, 4.0, 6.0, 8.0};
  EXPECT_DOUBLE_EQ(sample_covariance(xs, ys), 10.0 / 3.0);
  EXPECT_NEAR(sample_correlation(xs, ys), 1.0, 1e-15);
}

TEST(Statistics, KsDistanceOfExactQuantiles) {
  std::vector<double> u;
  for (int i = 0; i < 100; ++i) u.push_back((i + 0.5) / 100.0);
  EXPECT_NEAR(ks_distance(u, [](double x) { return x; }), 0.005, 1e-12);
}

TEST(Linalg, InverseAndSolveMatchEigen) {
  const Mat2 a{{{{4.0, 1.5}, {-2.0, 3.0}}}};
  const Mat2 inv = a.inverse();
  const Eigen::Matrix2d ref = fixtures::to_eigen(a).inverse();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(inv(i, j), ref(i, j), 1e-15);
  const Vec2 x = solve(a, {1.0, 2.0});
  const Eigen::Vector2d xr = fixtures::to_eigen(a).lu().solve(Eigen::Vector2d(1.0, 2.0));
  EXPECT_NEAR(x[0], xr(0), 1e-15);
  EXPECT_NEAR(x[1], xr(1), 1e-15);
  EXPECT_THROW(Mat2::symmetric(1.0, 1.0, 1.0).inverse(), DegeneracyError);
}

TEST(Linalg, SymmetricSpectralHelpers) {
  const Mat2 a = Mat2::symmetric(2.0, 0.7, 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(fixtures::to_eigen(a));
  EXPECT_NEAR(min_eigenvalue_sym(a), es.eigenvalues()(0), 1e-14);
  EXPECT_TRUE(is_positive_definite(a));
  EXPECT_FALSE(is_positive_definite(Mat2::symmetric(1.0, 1.0, 1.0)));
  EXPECT_FALSE(is_positive_definite(Mat2::symmetric(-1.0, 0.0, 1.0)));

  const Mat2 r = inverse_sqrt_spd(a);
  const Eigen::Matrix2d ref = es.operatorInverseSqrt();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(r(i, j), ref(i, j), 1e-14);
}

TEST(Linalg, BlockAlgebra) {
  const Mat2 a = Mat2::symmetric(1.0, 2.0, 3.0);
  const Mat2 b{{{{0.5, -1.0}, {2.0, 0.25}}}};
  const Mat4 m = Mat4::block(a, b, b.transpose(), a);
  EXPECT_DOUBLE_EQ(m.max_asymmetry(), 0.0);
  EXPECT_EQ(m.sub(0, 1)(1, 0), 2.0);
  const Eigen::Matrix4d e = fixtures::to_eigen(m);
  const Eigen::Matrix4d sq = e * e;
  const Mat4 msq = m * m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(msq(i, j), sq(i, j), 1e-13);
  const Vec4 v{1.0, -2.0, 0.5, 3.0};
  const Vec4 mv = m * v;
  const Eigen::Vector4d ev = e * Eigen::Vector4d(1.0, -2.0, 0.5, 3.0);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(mv[i], ev(i), 1e-14);
  EXPECT_DOUBLE_EQ(dot(v, v), 1.0 + 4.0 + 0.25 + 9.0);
}

TEST(Distributions, NormalQuantileAndCdf) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
  EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-9);
  EXPECT_NEAR(two_sided_z(0.95), 1.959963984540054, 1e-12);
  EXPECT_NEAR(two_sided_z(0.99), 2.5758293035489004, 1e-12);
  for (double p : {0.001, 0.02, 0.3, 0.77, 0.9999}) EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-13);
}

TEST(Distributions, ChiSquare) {
  EXPECT_NEAR(chi2_sf(3.841458820694124, 1), 0.05, 1e-12);
  EXPECT_NEAR(chi2_sf(5.991464547107979, 2), 0.05, 1e-12);
  EXPECT_DOUBLE_EQ(chi2_sf(0.0, 1), 1.0);
  EXPECT_DOUBLE_EQ(chi2_sf(0.0, 2), 1.0);
  EXPECT_NEAR(chi2_quantile(0.95, 1), 3.841458820694124, 1e-9);
  EXPECT_NEAR(chi2_quantile(0.95, 2), 5.991464547107979, 1e-9);
  EXPECT_THROW(chi2_sf(1.0, 3), ValidationError);
}
