#pragma once

namespace bartree {

double normal_cdf(double x);

/// Standard normal quantile: Acklam's rational approximation (relative
/// error 1.15e-9) followed by one Halley step against erfc, giving close to
/// full double precision on (0, 1).
double normal_quantile(double p);

/// Two-sided critical value z with P(|N(0,1)| <= z) = level.
double two_sided_z(double level);

/// Chi-square survival function for 1 or 2 degrees of freedom.
double chi2_sf(double x, int df);

/// Chi-square quantile for 1 or 2 degrees of freedom.
double chi2_quantile(double p, int df);

}  // namespace bartree
