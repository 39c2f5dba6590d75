#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>

#include "bartree/distributions.hpp"
#include "bartree/inference.hpp"
#include "bartree/rng.hpp"
#include "test_support.hpp"

using namespace bartree;

namespace {

ThetaEstimate noisy_estimate(std::uint64_t seed, const BarParams& bar = BarParams(1, 0.5, 2, 0.25)) {
  const ObservedTree t = simulate_joint(bar, NoiseParams(1.0, 0.5), fixtures::dense_law(), 10, 0, 0.0, seed);
  return estimate_theta(t, 10);
}

}  // namespace

TEST(Inference, ZeroNoiseDegenerateIntervals) {
  const ObservedTree t = fixtures::deterministic_full_tree(BarParams(1, 0.5, 2, 0.25), 4, 0.0);
  const ThetaEstimate est = estimate_theta(t, 4);
  const ThetaInference inf = theta_cis(est);
  for (const auto& ci : inf.ci) EXPECT_NEAR(ci.width(), 0.0, 1e-12);
  const NoiseInference ni = sigma_rho_cis(est, LimitsMode::plug_in);
  EXPECT_NEAR(ni.sigma2.width(), 0.0, 1e-12);
  ASSERT_TRUE(ni.rho.has_value());
  EXPECT_NEAR(ni.rho->width(), 0.0, 1e-12);
  EXPECT_NEAR(ni.sigma2.point, 0.0, 1e-15);
}

TEST(Inference, IntervalInvariants) {
  const ThetaEstimate est = noisy_estimate(3);
  const ThetaInference i90 = theta_cis(est, 0.90);
  const ThetaInference i99 = theta_cis(est, 0.99);
  for (int j = 0; j < 4; ++j) {
    EXPECT_LE(i90.ci[j].low, i90.ci[j].point);
    EXPECT_LE(i90.ci[j].point, i90.ci[j].high);
    EXPECT_GE(i99.ci[j].width(), i90.ci[j].width());
  }
  EXPECT_LT(i90.covariance.max_asymmetry(), 1e-12);
}

TEST(Inference, ReportFormatFixture) {
  const ConfidenceInterval ci{0.03627, 0.03276, 0.03979, 0.95};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5f [%.5f ; %.5f]", ci.point, ci.low, ci.high);
  EXPECT_STREQ(buf, "0.03627 [0.03276 ; 0.03979]");
  EXPECT_TRUE(ci.covers(0.035));
}

TEST(Wald, ExactNullGivesZero) {
  const Vec4 theta{1.0, 0.5, 1.0, 0.5};
  for (WaldKind k : {WaldKind::pair, WaldKind::intercept, WaldKind::slope}) {
    const WaldTest t = wald_statistic(theta, Mat4{}, k);
    EXPECT_EQ(t.statistic, 0.0);
    EXPECT_EQ(t.p_value, 1.0);
  }
}

TEST(Wald, DegreesOfFreedom) {
  const ThetaEstimate est = noisy_estimate(5);
  EXPECT_EQ(wald_test(est, WaldKind::pair).df, 2);
  EXPECT_EQ(wald_test(est, WaldKind::intercept).df, 1);
  EXPECT_EQ(wald_test(est, WaldKind::slope).df, 1);
}

TEST(Wald, MatchesDenseQuadraticForm) {
  const ThetaEstimate est = noisy_estimate(6);
  const Mat4 cov = plugin_covariance(est);
  Eigen::Matrix<double, 2, 4> R;
  R << 1, 0, -1, 0, 0, 1, 0, -1;
  Eigen::Vector4d th(est.theta[0], est.theta[1], est.theta[2], est.theta[3]);
  const Eigen::Vector2d r = R * th;
  const double stat = r.dot((R * fixtures::to_eigen(cov) * R.transpose()).ldlt().solve(r));
  const WaldTest t = wald_test(est, WaldKind::pair);
  EXPECT_NEAR(t.statistic, stat, 1e-10 * stat);
  EXPECT_NEAR(t.p_value, std::exp(-stat / 2.0), 1e-12);
  EXPECT_GE(t.p_value, 0.0);
  EXPECT_LE(t.p_value, 1.0);
}

TEST(Wald, SingularCovarianceRaises) {
  EXPECT_THROW(wald_statistic({1.0, 0.5, 2.0, 0.25}, Mat4{}, WaldKind::slope), DegeneracyError);
  EXPECT_THROW(wald_statistic({1.0, 0.5, 2.0, 0.25}, Mat4{}, WaldKind::pair), DegeneracyError);
}

TEST(Wald, SlopeStatisticInvariantUnderRescaling) {
  const ObservedTree t =
      simulate_joint(BarParams(1, 0.5, 2, 0.25), NoiseParams(1.0, 0.5), fixtures::dense_law(), 10, 0, 0.0, 13);
  ASSERT_TRUE(t.mask().survives());
  const ThetaEstimate a = estimate_theta(t, 10);
  const ThetaEstimate b = estimate_theta(t.rescaled(3.0), 10);
  EXPECT_NEAR(b.theta[1], a.theta[1], 1e-12);
  EXPECT_NEAR(b.theta[3], a.theta[3], 1e-12);
  EXPECT_NEAR(b.theta[0], 3.0 * a.theta[0], 1e-12);
  const double sa = wald_test(a, WaldKind::slope).statistic;
  const double sb = wald_test(b, WaldKind::slope).statistic;
  EXPECT_NEAR(sa, sb, 1e-9 * sa);
}

TEST(NoiseIntervals, TheoreticalMode) {
  const BarParams bar(1, 0.5, 2, 0.25);
  const LimitMatrices L = limit_matrices(bar, NoiseParams(1.0, 0.0), ReproductionLaw::full_observation());
  const ObservedTree t = simulate_joint(bar, NoiseParams(1.0, 0.0), ReproductionLaw::full_observation(), 8, 0, 0.0, 1);
  const ThetaEstimate est = estimate_theta(t, 8);
  const NoiseInference ni = sigma_rho_cis(est, LimitsMode::theoretical, &L, 0.95);
  EXPECT_DOUBLE_EQ(ni.sigma2_variance, 2.0);
  EXPECT_NEAR(ni.sigma2.width(), 2.0 * normal_quantile(0.975) * std::sqrt(2.0 / 511.0), 1e-12);
  EXPECT_THROW(sigma_rho_cis(est, LimitsMode::theoretical, nullptr), ValidationError);
}

TEST(NoiseIntervals, PlugInVarianceFormula) {
  const ThetaEstimate est = noisy_estimate(8);
  const NoiseInference ni = sigma_rho_cis(est, LimitsMode::plug_in);
  const double s4 = est.sigma2 * est.sigma2;
  const double expect = (est.tau4 - s4) + 2.0 * static_cast<double>(est.pairs) / static_cast<double>(est.observed) *
                                              (*est.nu2tau4 - s4);
  EXPECT_NEAR(ni.sigma2_variance, expect, 1e-12);
  EXPECT_NEAR(ni.rho_variance, *est.nu2tau4 - *est.rho * *est.rho, 1e-12);
}

TEST(NoiseIntervals, MissingRhoWarns) {
  const ObservedTree t = ObservedTree::from_records({{1, 1.0}, {2, 3.0}, {4, 2.0}, {8, 1.5}, {16, 1.2}});
  const ThetaEstimate est = estimate_theta(t, 4);
  const NoiseInference ni = sigma_rho_cis(est, LimitsMode::plug_in);
  EXPECT_FALSE(ni.rho.has_value());
  EXPECT_FALSE(ni.warnings.empty());
  const ThetaInference ti = theta_cis(est);
  EXPECT_FALSE(ti.warnings.empty());
}
