#include "bartree/inference.hpp"

#include <algorithm>
#include <cmath>

#include "bartree/distributions.hpp"

namespace bartree {

namespace {

std::vector<Vec4> restriction_rows(WaldKind kind) {
  const Vec4 intercept{1.0, 0.0, -1.0, 0.0};
  const Vec4 slope{0.0, 1.0, 0.0, -1.0};
  switch (kind) {
    case WaldKind::pair:
      return {intercept, slope};
    case WaldKind::intercept:
      return {intercept};
    case WaldKind::slope:
      return {slope};
  }
  return {};
}

double quad(const Vec4& u, const Mat4& cov, const Vec4& v) { return dot(u, cov * v); }

}  // namespace

ConfidenceInterval normal_interval(double point, double variance, double level) {
  const double half = two_sided_z(level) * std::sqrt(std::max(variance, 0.0));
  return {point, point - half, point + half, level};
}

Mat4 plugin_covariance(const ThetaEstimate& est) {
  const Mat4 sigma = est.sigma_effective();
  const Mat2 inv0 = sigma.sub(0, 0).inverse();
  const Mat2 inv1 = sigma.sub(1, 1).inverse();
  const Mat4 inv = Mat4::block_diag(inv0, inv1);
  Mat4 cov = inv * est.gamma_plugin() * inv;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < i; ++j) {
      const double avg = 0.5 * (cov(i, j) + cov(j, i));
      cov(i, j) = cov(j, i) = avg;
    }
  return cov;
}

ThetaInference theta_cis(const ThetaEstimate& est, double level) {
  ThetaInference out;
  if (!est.rho) out.warnings.push_back("rho hat unavailable (" + est.rho_note + "); Gamma built with rho = 0");
  if (est.regularized) out.warnings.push_back("design matrix regularised; intervals are unreliable");
  out.covariance = plugin_covariance(est);
  for (int j = 0; j < 4; ++j) out.ci[j] = normal_interval(est.theta[j], out.covariance(j, j), level);
  return out;
}

const char* wald_name(WaldKind kind) {
  switch (kind) {
    case WaldKind::pair:
      return "pair";
    case WaldKind::intercept:
      return "intercept";
    case WaldKind::slope:
      return "slope";
  }
  return "?";
}

WaldTest wald_statistic(const Vec4& theta, const Mat4& cov, WaldKind kind) {
  WaldTest t;
  t.kind = kind;
  t.restriction = restriction_rows(kind);
  t.df = static_cast<int>(t.restriction.size());

  std::vector<double> r;
  bool null_exact = true;
  for (const Vec4& row : t.restriction) {
    r.push_back(dot(row, theta));
    null_exact = null_exact && r.back() == 0.0;
  }
  if (null_exact) {
    t.statistic = 0.0;
    t.p_value = 1.0;
    return t;
  }

  if (t.df == 1) {
    const double v = quad(t.restriction[0], cov, t.restriction[0]);
    if (!(v > 1e-300)) throw DegeneracyError(std::string("restricted covariance of the ") + wald_name(kind) +
                                             " test is singular");
    t.statistic = r[0] * r[0] / v;
  } else {
    const Mat2 rc = Mat2::symmetric(quad(t.restriction[0], cov, t.restriction[0]),
                                    quad(t.restriction[0], cov, t.restriction[1]),
                                    quad(t.restriction[1], cov, t.restriction[1]));
    const double scale = rc.trace();
    if (!(scale > 1e-300) || !(rc.det() > 1e-12 * scale * scale)) {
      throw DegeneracyError(std::string("restricted covariance of the ") + wald_name(kind) + " test is singular");
    }
    const Vec2 x = solve(rc, {r[0], r[1]});
    t.statistic = std::max(0.0, r[0] * x[0] + r[1] * x[1]);
  }
  t.p_value = std::clamp(chi2_sf(t.statistic, t.df), 0.0, 1.0);
  return t;
}

WaldTest wald_test(const ThetaEstimate& est, WaldKind kind) {
  return wald_statistic(est.theta, plugin_covariance(est), kind);
}

NoiseInference sigma_rho_cis(const ThetaEstimate& est, LimitsMode mode, const LimitMatrices* limits, double level) {
  NoiseInference out;
  const double obs = static_cast<double>(est.observed);
  const double pairs = static_cast<double>(est.pairs);
  const double s4 = est.sigma2 * est.sigma2;
  const double rho = est.rho.value_or(0.0);

  if (mode == LimitsMode::theoretical) {
    if (limits == nullptr) throw ValidationError("theoretical intervals need the limit matrices");
    out.sigma2_variance = limits->clt_var_sigma2;
    out.rho_variance = limits->clt_var_rho;
  } else {
    // pairs / observed estimates pbar11 / pi.
    const double mixed = est.nu2tau4.value_or(s4);
    out.sigma2_variance = (est.tau4 - s4) + 2.0 * (pairs / obs) * (mixed - s4);
    out.rho_variance = est.nu2tau4 ? *est.nu2tau4 - rho * rho : 0.0;
  }
  if (out.sigma2_variance < 0.0) {
    out.warnings.push_back("negative sigma2 variance estimate clipped to 0");
    out.sigma2_variance = 0.0;
  }
  if (out.rho_variance < 0.0) {
    out.warnings.push_back("negative rho variance estimate clipped to 0");
    out.rho_variance = 0.0;
  }

  out.sigma2 = normal_interval(est.sigma2, out.sigma2_variance / obs, level);
  if (est.rho) {
    out.rho = normal_interval(*est.rho, out.rho_variance / pairs, level);
  } else {
    out.warnings.push_back("rho hat unavailable (" + est.rho_note + "); no interval for rho");
  }
  return out;
}

}  // namespace bartree
