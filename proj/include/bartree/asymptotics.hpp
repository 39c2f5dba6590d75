#pragma once

#include "bartree/bar_process.hpp"
#include "bartree/gw_observation.hpp"
#include "bartree/linalg.hpp"

namespace bartree {

/// Limits of the normalised design sums and the derived CLT/QSL constants.
struct LimitMatrices {
  Vec2 h{};     ///< lim H^i_n / |T*_n|, H^i_n = sum delta_{2k+i} X_k
  Vec2 kvec{};  ///< lim K^i_n / |T*_n|, K^i_n = sum delta_{2k+i} X_k^2
  double h01 = 0.0;
  double k01 = 0.0;
  double pbar11 = 0.0;
  Mat2 L0, L1, L01;
  Mat4 sigma_lim;
  Mat4 gamma_lim;
  Mat4 clt_cov_theta;          ///< Sigma^{-1} Gamma Sigma^{-1}
  double clt_var_sigma2 = 0.0;  ///< (pi (tau4 - s4) + 2 pbar (nu2 tau4 - s4)) / pi
  double clt_var_rho = 0.0;     ///< nu2 tau4 - rho^2
  double qsl_theta = 0.0;       ///< 4 sigma2 (pi - 1) / pi, as displayed for the theta QSL
  double qsl_martingale = 0.0;  ///< 4 sigma2, limit of (1/n) sum M^t Sigma^{-1} M
  double sigma2_bias = 0.0;     ///< 4 (pi - 1) sigma2
  double rho_bias_cross = 0.0;  ///< 4 rho (pi-1)/pi tr(L1^{-1/2} L01 L0^{-1/2})
  double rho_bias = 0.0;        ///< rho (pi-1)/pbar tr(L1^{-1} L01^2 L0^{-1})
};

/// h = (I - P1~)^{-1} P^t (a z0, c z1), P1~ = P^t diag(b, d) / pi.
Vec2 compute_h(const BarParams& bar, const GWSpectral& spectrum);

/// k = (I - P2~)^{-1} P^t ((a^2+s2) z0 + 2ab h0/pi, (c^2+s2) z1 + 2cd h1/pi),
/// P2~ = P^t diag(b^2, d^2) / pi.
Vec2 compute_k(const BarParams& bar, const NoiseParams& noise, const GWSpectral& spectrum, const Vec2& h);

struct CrossLimits {
  double pbar11 = 0.0;
  double h01 = 0.0;
  double k01 = 0.0;
};

CrossLimits compute_cross_limits(const BarParams& bar, const NoiseParams& noise, const ReproductionLaw& law,
                                 const GWSpectral& spectrum, const Vec2& h, const Vec2& kvec);

/// Assembles every limit object; DegeneracyError if L0 or L1 is not positive
/// definite, ValidationError if the observation process is not supercritical.
LimitMatrices limit_matrices(const BarParams& bar, const NoiseParams& noise, const ReproductionLaw& law);

}  // namespace bartree
