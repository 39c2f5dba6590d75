#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace bartree {

/// Neumaier's variant of Kahan summation: the running compensation also
/// captures the case where the addend is larger than the partial sum.
class CompensatedSum {
 public:
  CompensatedSum& operator+=(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  CompensatedSum& operator+=(const CompensatedSum& other) {
    *this += other.sum_;
    *this += other.compensation_;
    return *this;
  }

  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

double mean(std::span<const double> xs);

/// Unbiased sample variance; 0 for fewer than two samples.
double sample_variance(std::span<const double> xs);

/// Median of a copy of xs (average of the middle pair for even sizes).
double median(std::span<const double> xs);

/// Sample covariance of two equally long series.
double sample_covariance(std::span<const double> xs, std::span<const double> ys);

double sample_correlation(std::span<const double> xs, std::span<const double> ys);

/// Kolmogorov-Smirnov distance between the empirical law of xs and a
/// continuous reference CDF.
template <typename Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf);

}  // namespace bartree

#include <algorithm>

template <typename Cdf>
double bartree::ks_distance(std::vector<double> xs, Cdf cdf) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f));
  }
  return d;
}
