#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bartree/bar_process.hpp"
#include "bartree/linalg.hpp"

namespace bartree {

/// Design matrices over the mothers of T_n:
///   S^i_n  = sum_k delta_{2k+i} [1 X_k; X_k X_k^2]
///   S01_n  = sum_k delta_{2k} delta_{2k+1} [1 X_k; X_k X_k^2]
struct DesignMatrices {
  Generation n = 0;
  Mat2 S0;
  Mat2 S1;
  Mat2 S01;
  std::uint64_t observed = 0;         ///< |T*_n|
  std::uint64_t pairs = 0;            ///< |T*01_n|, mothers with both children observed
  std::uint64_t last_generation = 0;  ///< |G*_n|

  Mat4 sigma() const { return Mat4::block_diag(S0, S1); }
  /// [[s2 S0, rho S01], [rho S01, s2 S1]]
  Mat4 gamma(double sigma2, double rho) const;
};

/// Requires the children of G_n, i.e. tree depth >= n + 1.
DesignMatrices accumulate_design(const ObservedTree& tree, Generation n);

/// Threshold rule for adding the identity to a design block.
bool needs_regularization(const Mat2& block);

struct ThetaEstimate {
  Generation n = 0;
  Vec4 theta{};  ///< (a, b, c, d) hat
  double sigma2 = 0.0;       ///< residuals at theta_n
  std::optional<double> rho;  ///< residuals at theta_n
  /// Same estimators with predictive residuals: mothers in G_l use theta_l
  /// (theta_n for the root and for regularised steps).
  double sigma2_predictive = 0.0;
  std::optional<double> rho_predictive;
  std::string rho_note;  ///< why rho is absent, when it is
  double tau4 = 0.0;                 ///< fourth-moment plug-in
  std::optional<double> nu2tau4;     ///< mixed fourth-moment plug-in
  DesignMatrices design;             ///< Sigma_{n-1} before regularisation
  bool regularized = false;
  std::uint64_t observed = 0;        ///< |T*_n|
  std::uint64_t pairs = 0;           ///< |T*01_{n-1}|

  /// theta hat at every generation l = 1..n (index l-1), the matching
  /// regularisation flags and |T*_{l-1}|.
  std::vector<Vec4> path;
  std::vector<bool> path_regularized;
  std::vector<std::uint64_t> path_observed;

  /// Sigma_{n-1}, plus the identity when regularised.
  Mat4 sigma_effective() const;
  /// Gamma_{n-1} with the sigma2 / rho plug-ins (rho absent -> 0).
  Mat4 gamma_plugin() const;
};

/// Least-squares fit of theta from generations 0..n plus the noise
/// variance/covariance estimators and their fourth-moment plug-ins.
ThetaEstimate estimate_theta(const ObservedTree& tree, Generation n);

struct MartingaleDiagnostics {
  std::vector<Vec4> M;               ///< M_l, l = 1..n
  std::vector<double> V;             ///< M_l^t Sigma_{l-1}^{-1} M_l
  std::vector<double> qsl_running;   ///< (1/l) sum_{j<=l} V_j
  std::vector<double> identity_gap;  ///< |Sigma_{l-1}(theta_l - theta) - M_l| relative; NaN when regularised
  std::vector<bool> regularized;
};

MartingaleDiagnostics martingale_diagnostics(const ObservedTree& tree, const BarParams& theta_true, Generation up_to_n);

struct NoiseFunctionals {
  double sigma2 = 0.0;
  std::optional<double> rho;
};

/// sigma2_n and rho_n evaluated at the recorded true noise.
NoiseFunctionals true_noise_functionals(const ObservedTree& tree, Generation n);

}  // namespace bartree
