#include "bartree/distributions.hpp"

#include <cmath>
#include <numbers>

#include "bartree/errors.hpp"

namespace bartree {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("normal quantile needs 0 < p < 1");

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement.
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

double two_sided_z(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0, 1)");
  return normal_quantile(0.5 + 0.5 * level);
}

double chi2_sf(double x, int df) {
  if (x <= 0.0) return 1.0;
  switch (df) {
    case 1:
      return std::erfc(std::sqrt(0.5 * x));
    case 2:
      return std::exp(-0.5 * x);
    default:
      throw ValidationError("chi-square with df other than 1 or 2 is not supported");
  }
}

double chi2_quantile(double p, int df) {
  if (!(p >= 0.0 && p < 1.0)) throw ValidationError("chi-square quantile needs 0 <= p < 1");
  switch (df) {
    case 1: {
      if (p == 0.0) return 0.0;
      const double z = normal_quantile(0.5 + 0.5 * p);
      return z * z;
    }
    case 2:
      return -2.0 * std::log1p(-p);
    default:
      throw ValidationError("chi-square with df other than 1 or 2 is not supported");
  }
}

}  // namespace bartree
