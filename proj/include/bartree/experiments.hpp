#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bartree/asymptotics.hpp"
#include "bartree/bar_process.hpp"
#include "bartree/gw_observation.hpp"

namespace bartree {

struct McConfig {
  BarParams bar;
  NoiseParams noise;
  ReproductionLaw law;
  int root_type = 0;
  double x1 = 0.0;
  std::vector<Generation> depths;
  std::uint64_t replicates = 1;
  std::uint64_t seed = 0;
  bool condition_on_survival = true;
  double level = 0.95;
  /// Cap on simulated replicates when conditioning on survival; 0 selects
  /// 50 * replicates + 100.
  std::uint64_t max_attempts = 0;

  /// replicates >= 1, depths non-empty, ascending, each >= 2, level in (0,1).
  void validate() const;
  Generation max_depth() const { return depths.back(); }
  std::uint64_t attempt_cap() const { return max_attempts ? max_attempts : 50 * replicates + 100; }
};

/// One checked (or informational) quantity of a report.
struct TrackedStatistic {
  std::string name;
  Generation depth = 0;
  std::string summary;  ///< how replicates were combined: median, mean, variance, rate, ...
  double empirical = 0.0;
  double target = 0.0;
  double low = 0.0;  ///< acceptance band [low, high] around the target
  double high = 0.0;
  std::string tolerance;  ///< human-readable tolerance rule
  double mc_std_error = 0.0;
  std::uint64_t count = 0;
  bool informational = false;
  bool pass = false;
};

struct DepthCount {
  Generation depth = 0;
  std::uint64_t used = 0;     ///< surviving replicates entering the statistics
  std::uint64_t extinct = 0;  ///< replicates extinct by this depth
};

struct McReport {
  std::string experiment;
  McConfig config;
  std::uint64_t attempted = 0;
  std::uint64_t surviving = 0;
  std::uint64_t extinct = 0;
  double survival_target = 0.0;  ///< 1 - q^{root_type}
  std::vector<DepthCount> depth_counts;
  std::vector<TrackedStatistic> stats;
  std::vector<std::string> notes;

  /// Per-replicate table for external plotting.
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Every non-informational statistic passed.
  bool pass() const;
  const TrackedStatistic* find(const std::string& name, std::optional<Generation> depth = std::nullopt) const;
};

/// Empirical S^i_{D-1} / |T*_{D-1}| against L0, L1, L01.
McReport mc_limit_matrices(const McConfig& cfg);

/// R_n = ||theta_n - theta||^2 |T*_{n-1}| / log |T*_{n-1}|.
McReport mc_consistency_rate(const McConfig& cfg);

/// (1/n) sum_l |T*_{l-1}| (theta_l - theta)^t Sigma (theta_l - theta).
McReport mc_qsl(const McConfig& cfg);

/// Covariance, normality and coverage of the theta, sigma2 and rho CLTs.
McReport mc_clt(const McConfig& cfg);

/// |T*_n| (sigma2_n hat - sigma2_n) / n and the rho analogue.
McReport mc_variance_estimators(const McConfig& cfg);

/// Rejection rates, p-value uniformity and power of the three Wald tests.
McReport mc_wald(const McConfig& cfg);

enum class Experiment { limit_matrices, consistency_rate, qsl, clt, variance_estimators, wald };

Experiment parse_experiment(const std::string& name);
const char* experiment_name(Experiment e);
McReport run_experiment(Experiment e, const McConfig& cfg);

/// Worker count: BARTREE_THREADS when set (>= 1), else the hardware count.
unsigned worker_count();

}  // namespace bartree
