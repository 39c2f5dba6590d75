#include "bartree/asymptotics.hpp"

#include <cmath>

namespace bartree {

namespace {

constexpr double kSolveTol = 1e-12;

Vec2 solve_resolvent(const Mat2& Ptilde, const Vec2& rhs, const char* what) {
  const Mat2 system = Mat2::identity() - Ptilde;
  if (!(std::abs(system.det()) > kSolveTol)) {
    throw DegeneracyError(std::string("I - P~ is singular while computing ") + what);
  }
  return solve(system, rhs);
}

}  // namespace

Vec2 compute_h(const BarParams& bar, const GWSpectral& spectrum) {
  const Mat2 Pt = spectrum.P.transpose();
  const Mat2 P1 = (1.0 / spectrum.pi) * (Pt * Mat2::diag(bar.b, bar.d));
  const Vec2 rhs = Pt * Vec2{bar.a * spectrum.z[0], bar.c * spectrum.z[1]};
  return solve_resolvent(P1, rhs, "h");
}

Vec2 compute_k(const BarParams& bar, const NoiseParams& noise, const GWSpectral& spectrum, const Vec2& h) {
  const Mat2 Pt = spectrum.P.transpose();
  const Mat2 P2 = (1.0 / spectrum.pi) * (Pt * Mat2::diag(bar.b * bar.b, bar.d * bar.d));
  const double s2 = noise.sigma2;
  const Vec2 inner{(bar.a * bar.a + s2) * spectrum.z[0] + 2.0 / spectrum.pi * bar.a * bar.b * h[0],
                   (bar.c * bar.c + s2) * spectrum.z[1] + 2.0 / spectrum.pi * bar.c * bar.d * h[1]};
  return solve_resolvent(P2, Pt * inner, "k");
}

CrossLimits compute_cross_limits(const BarParams& bar, const NoiseParams& noise, const ReproductionLaw& law,
                                 const GWSpectral& spectrum, const Vec2& h, const Vec2& kvec) {
  const double p0 = law.type[0].p11;
  const double p1 = law.type[1].p11;
  const double pi = spectrum.pi;
  const Vec2& z = spectrum.z;
  CrossLimits out;
  out.pbar11 = p0 * z[0] + p1 * z[1];
  out.h01 = p0 * (bar.a * z[0] + bar.b * h[0] / pi) + p1 * (bar.c * z[1] + bar.d * h[1] / pi);
  out.k01 = p0 * (bar.a * bar.a * z[0] + bar.b * bar.b * kvec[0] / pi + 2.0 * bar.a * bar.b * h[0] / pi) +
            p1 * (bar.c * bar.c * z[1] + bar.d * bar.d * kvec[1] / pi + 2.0 * bar.c * bar.d * h[1] / pi) +
            noise.sigma2 * out.pbar11;
  return out;
}

LimitMatrices limit_matrices(const BarParams& bar, const NoiseParams& noise, const ReproductionLaw& law) {
  noise.validate();
  const GWSpectral spectrum = spectral(law);
  if (!spectrum.supercritical) {
    throw ValidationError("observation process is not supercritical (pi = " + std::to_string(spectrum.pi) + ")");
  }
  const double pi = spectrum.pi;

  LimitMatrices L;
  L.h = compute_h(bar, spectrum);
  L.kvec = compute_k(bar, noise, spectrum, L.h);
  const CrossLimits cross = compute_cross_limits(bar, noise, law, spectrum, L.h, L.kvec);
  L.pbar11 = cross.pbar11;
  L.h01 = cross.h01;
  L.k01 = cross.k01;

  L.L0 = Mat2::symmetric(pi * spectrum.z[0], L.h[0], L.kvec[0]);
  L.L1 = Mat2::symmetric(pi * spectrum.z[1], L.h[1], L.kvec[1]);
  L.L01 = Mat2::symmetric(L.pbar11, L.h01, L.k01);
  if (!is_positive_definite(L.L0) || !is_positive_definite(L.L1)) {
    throw DegeneracyError("limit design matrix L0 or L1 is not positive definite; the model is degenerate");
  }

  const double s2 = noise.sigma2;
  const double rho = noise.rho();
  L.sigma_lim = Mat4::block_diag(L.L0, L.L1);
  L.gamma_lim = Mat4::block(s2 * L.L0, rho * L.L01, rho * L.L01, s2 * L.L1);

  const Mat2 inv0 = L.L0.inverse();
  const Mat2 inv1 = L.L1.inverse();
  const Mat2 off = rho * (inv0 * L.L01 * inv1);
  L.clt_cov_theta = Mat4::block(s2 * inv0, off, off.transpose(), s2 * inv1);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < i; ++j) {
      const double avg = 0.5 * (L.clt_cov_theta(i, j) + L.clt_cov_theta(j, i));
      L.clt_cov_theta(i, j) = L.clt_cov_theta(j, i) = avg;
    }

  const NoiseMoments mom = noise_moments(noise);
  const double s4 = s2 * s2;
  L.clt_var_sigma2 = (pi * (mom.tau4 - s4) + 2.0 * L.pbar11 * (mom.nu2tau4() - s4)) / pi;
  L.clt_var_rho = mom.nu2tau4() - rho * rho;
  L.qsl_theta = 4.0 * s2 * (pi - 1.0) / pi;
  L.qsl_martingale = 4.0 * s2;
  L.sigma2_bias = 4.0 * (pi - 1.0) * s2;

  const Mat2 cross_sqrt = inverse_sqrt_spd(L.L1) * L.L01 * inverse_sqrt_spd(L.L0);
  L.rho_bias_cross = 4.0 * rho * (pi - 1.0) / pi * cross_sqrt.trace();
  const Mat2 cross_full = inv1 * L.L01 * L.L01 * inv0;
  L.rho_bias = L.pbar11 > 0.0 ? rho * (pi - 1.0) / L.pbar11 * cross_full.trace() : 0.0;
  return L;
}

}  // namespace bartree
