#pragma once

#include <array>
#include <string>
#include <vector>

#include "bartree/asymptotics.hpp"
#include "bartree/estimation.hpp"

namespace bartree {

struct ConfidenceInterval {
  double point = 0.0;
  double low = 0.0;
  double high = 0.0;
  double level = 0.95;

  double width() const { return high - low; }
  bool covers(double value) const { return low <= value && value <= high; }
};

/// Symmetric normal interval point +/- z(level) sqrt(variance); a negative
/// variance is treated as 0.
ConfidenceInterval normal_interval(double point, double variance, double level);

struct ThetaInference {
  std::array<ConfidenceInterval, 4> ci;  ///< a, b, c, d
  Mat4 covariance;                        ///< Sigma_{n-1}^{-1} Gamma_{n-1} Sigma_{n-1}^{-1}
  std::vector<std::string> warnings;
};

/// Plug-in covariance Sigma_{n-1}^{-1} Gamma_{n-1} Sigma_{n-1}^{-1}; the
/// |T*| scalings of the CLT cancel against the unnormalised sums.
Mat4 plugin_covariance(const ThetaEstimate& est);

ThetaInference theta_cis(const ThetaEstimate& est, double level = 0.95);

enum class WaldKind { pair, intercept, slope };

const char* wald_name(WaldKind kind);

struct WaldTest {
  WaldKind kind = WaldKind::pair;
  std::vector<Vec4> restriction;  ///< rows of R, null R theta = 0
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// Wald statistic of R theta = 0 under covariance `cov` of theta.
/// Rows of R: pair (a-c, b-d), intercept (a-c), slope (b-d).
WaldTest wald_statistic(const Vec4& theta, const Mat4& cov, WaldKind kind);

/// Wald test with the plug-in covariance of `est`.
WaldTest wald_test(const ThetaEstimate& est, WaldKind kind);

enum class LimitsMode { plug_in, theoretical };

struct NoiseInference {
  ConfidenceInterval sigma2;
  std::optional<ConfidenceInterval> rho;
  double sigma2_variance = 0.0;  ///< V_sigma used for the interval
  double rho_variance = 0.0;     ///< nu2 tau4 - rho^2 used for the interval
  std::vector<std::string> warnings;
};

/// Intervals for sigma2 and rho. `limits` is only read in theoretical mode.
NoiseInference sigma_rho_cis(const ThetaEstimate& est, LimitsMode mode, const LimitMatrices* limits = nullptr,
                             double level = 0.95);

}  // namespace bartree
