#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "bartree/linalg.hpp"
#include "bartree/tree_core.hpp"

namespace bartree {

/// Offspring law of one type: probabilities of (j0, j1) in {0,1}^2, where j0
/// (resp. j1) says whether the type-0 (resp. type-1) child is observed.
struct OffspringLaw {
  double p00 = 0.0;  ///< no observed child
  double p10 = 0.0;  ///< only the even (type-0) child
  double p01 = 0.0;  ///< only the odd (type-1) child
  double p11 = 0.0;  ///< both children

  /// Mean number of observed children of type j.
  double mean_children(int j) const { return j == 0 ? p10 + p11 : p01 + p11; }
  /// Generating function f(s0, s1).
  double generating(double s0, double s1) const { return p00 + p10 * s0 + p01 * s1 + p11 * s0 * s1; }
};

/// Reproduction laws of the two-type Galton-Watson observation process.
struct ReproductionLaw {
  std::array<OffspringLaw, 2> type{};

  /// Every cell observed: p(1,1) = 1 for both types.
  static ReproductionLaw full_observation();
  /// Same law for both types.
  static ReproductionLaw symmetric(const OffspringLaw& law);

  /// Throws ValidationError unless each law is a probability vector
  /// (entries in [0,1], sum 1 within 1e-12).
  void validate() const;

  /// Descendants matrix P, p_ij = expected type-j children of a type-i cell.
  Mat2 descendants() const;
};

struct GWSpectral {
  Mat2 P;
  Mat2 sigma2;        ///< reproduction variances p_ij (1 - p_ij)
  double pi = 0.0;    ///< dominant eigenvalue
  double pi_minor = 0.0;
  Vec2 z{};           ///< left eigenvector, z0 + z1 = 1
  Vec2 y{};           ///< right eigenvector, normalised by z . y = 1
  Vec2 q{};           ///< extinction probabilities from one type-i ancestor
  double pbar11 = 0.0;
  bool supercritical = false;
};

/// Spectral quantities of P. Throws ValidationError when some p_ij = 0;
/// pi <= 1 is reported through `supercritical`, not as an error.
GWSpectral spectral(const ReproductionLaw& law);

/// Smallest fixed point of q_i = f^(i)(q0, q1), iterated from (0, 0).
Vec2 extinction_probabilities(const ReproductionLaw& law, double tol = 1e-12, std::uint64_t max_iter = 1'000'000);

/// Observed cells of a tree up to `depth`, stored per generation as sorted ids.
class ObservationMask {
 public:
  ObservationMask() = default;
  /// Builds and validates (root present, prefix closure, ids within depth).
  ObservationMask(std::vector<NodeId> observed, Generation depth, int root_type = 0);
  /// Internal fast path: generations already sorted and closed.
  static ObservationMask from_generations(std::vector<std::vector<NodeId>> generations, Generation depth,
                                          int root_type);

  Generation depth() const { return depth_; }
  int root_type() const { return root_type_; }

  std::span<const NodeId> generation(Generation n) const;
  bool contains(NodeId k) const;

  /// |G*_n|
  std::uint64_t generation_size(Generation n) const;
  /// |T*_n|
  std::uint64_t subtree_count(Generation n) const;
  /// Z_n^i, observed cells of parity i in generation n (n >= 1).
  std::uint64_t type_count(Generation n, int type) const;
  std::uint64_t size() const { return subtree_count(depth_); }

  /// Some generation 1..depth is empty.
  bool extinct() const;
  /// |G*_depth| > 0
  bool survives() const { return generation_size(depth_) > 0; }

  /// All observed ids in ascending order.
  std::vector<NodeId> nodes() const;

 private:
  std::vector<std::vector<NodeId>> generations_;
  Generation depth_ = 0;
  int root_type_ = 0;
};

/// Draws delta_{2k} = delta_k zeta_k^0, delta_{2k+1} = delta_k zeta_k^1 down to
/// `depth`. Node 1 reproduces with the law of `root_type`, node k >= 2 with
/// the law of its parity.
ObservationMask simulate_mask(const ReproductionLaw& law, Generation depth, int root_type, std::uint64_t seed);

struct PiEstimate {
  double pi_hat = 0.0;
  double low = 0.0;
  double high = 0.0;
  double std_error = 0.0;
};

/// Ratio estimator sum_{l=1..n} |G*_l| / sum_{l=0..n-1} |G*_l| with a
/// normal interval from the plug-in offspring-count variance.
PiEstimate estimate_pi(const ObservationMask& mask, double level = 0.95);

struct RenormalizedPopulation {
  double by_generation = 0.0;  ///< |G*_n| / pi^n
  double by_subtree = 0.0;     ///< (pi - 1) |T*_n| / (pi^{n+1} - 1)
};

RenormalizedPopulation renormalized_population(const ObservationMask& mask, double pi);

}  // namespace bartree
