#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bartree/gw_observation.hpp"

namespace bartree {

enum class StabilityCheck { enforce, skip };

/// Coefficients theta = (a, b, c, d): X_{2k} = a + b X_k + e_{2k},
/// X_{2k+1} = c + d X_k + e_{2k+1}.
struct BarParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  BarParams() = default;
  /// Enforces 0 < max(|b|,|d|) < 1 unless check == skip.
  BarParams(double a, double b, double c, double d, StabilityCheck check = StabilityCheck::enforce);

  /// Intercept and slope used for a child of the given type.
  double intercept(int type) const { return type == 0 ? a : c; }
  double slope(int type) const { return type == 0 ? b : d; }
  Vec4 as_vector() const { return {a, b, c, d}; }
};

enum class NoiseFamily { gaussian };

struct NoiseMoments {
  double tau4 = 0.0;     ///< E[e^4]
  double nu2 = 0.0;      ///< E[e_{2k}^2 e_{2k+1}^2] / tau4
  double kappa8 = 0.0;   ///< E[e^8]
  double lambda4 = 0.0;  ///< E[e_{2k}^4 e_{2k+1}^4] / kappa8
  double nu2tau4() const { return nu2 * tau4; }
};

/// Sister-pair noise with variance sigma2 and covariance rho = rho_prime sigma2.
struct NoiseParams {
  double sigma2 = 1.0;
  double rho_prime = 0.0;
  NoiseFamily family = NoiseFamily::gaussian;

  NoiseParams() = default;
  NoiseParams(double sigma2, double rho_prime, NoiseFamily family = NoiseFamily::gaussian);

  double rho() const { return rho_prime * sigma2; }
  /// sigma2 >= 0 and |rho_prime| <= 1.
  void validate() const;
};

/// Closed-form moments of the noise family.
NoiseMoments noise_moments(const NoiseParams& noise);

/// Observed BAR data: the mask plus one value per observed node, stored in
/// the mask's per-generation order. Simulated trees also carry the noise.
class ObservedTree {
 public:
  ObservedTree() = default;
  ObservedTree(ObservationMask mask, std::vector<std::vector<double>> values,
               std::optional<std::vector<std::vector<double>>> noise = std::nullopt);

  /// Tree from explicit (id, value) records; validates prefix closure.
  static ObservedTree from_records(std::vector<std::pair<NodeId, double>> records,
                                   std::optional<Generation> depth = std::nullopt, int root_type = 0);

  const ObservationMask& mask() const { return mask_; }
  Generation depth() const { return mask_.depth(); }
  bool has_noise() const { return noise_.has_value(); }

  std::span<const NodeId> ids(Generation n) const { return mask_.generation(n); }
  std::span<const double> values(Generation n) const;
  /// Recorded noise of generation n (n >= 1); throws without a noise record.
  std::span<const double> noise(Generation n) const;

  std::optional<double> value(NodeId k) const;
  std::optional<double> noise_of(NodeId k) const;

  /// Same tree cut at a shallower depth.
  ObservedTree truncated(Generation depth) const;

  /// Node-wise affine map X -> scale X + shift (noise record dropped).
  ObservedTree rescaled(double scale, double shift = 0.0) const;

  /// (id, value) records in ascending id order.
  std::vector<std::pair<NodeId, double>> records() const;

 private:
  ObservationMask mask_;
  std::vector<std::vector<double>> values_;
  std::optional<std::vector<std::vector<double>>> noise_;
};

struct JointModel {
  BarParams bar;
  NoiseParams noise;
  ReproductionLaw law;
  int root_type = 0;
  double x1 = 0.0;
};

/// Simulates the observation mask (mask stream of `seed`) and then the BAR
/// values along observed lineages (noise stream of `seed`).
ObservedTree simulate_joint(const JointModel& model, Generation depth, std::uint64_t seed);

ObservedTree simulate_joint(const BarParams& bar, const NoiseParams& noise, const ReproductionLaw& law,
                            Generation depth, int root_type, double x1, std::uint64_t seed);

}  // namespace bartree
