#include "bartree/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "bartree/distributions.hpp"
#include "bartree/estimation.hpp"
#include "bartree/inference.hpp"
#include "bartree/numeric.hpp"
#include "bartree/rng.hpp"

namespace bartree {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf() { return std::numeric_limits<double>::infinity(); }

/// Values of one replicate: one row of statistics per configured depth,
/// empty for depths at which the replicate is extinct.
struct ReplicateOutcome {
  std::uint64_t seed = 0;
  bool survived = false;  ///< alive at the deepest configured depth
  std::vector<std::vector<double>> rows;
  std::string failure;
};

using Evaluator = std::function<std::vector<double>(const ObservedTree&, Generation)>;

/// Surviving rows grouped by depth, in replicate order.
struct Collected {
  std::vector<std::string> names;
  std::vector<std::vector<std::vector<double>>> by_depth;

  std::vector<double> column(std::size_t depth_index, std::size_t col) const {
    std::vector<double> out;
    for (const auto& row : by_depth[depth_index])
      if (std::isfinite(row[col])) out.push_back(row[col]);
    return out;
  }
};

ReplicateOutcome run_replicate(const McConfig& cfg, std::uint64_t index, std::size_t columns, const Evaluator& eval) {
  ReplicateOutcome out;
  out.seed = derive_seed(cfg.seed, kReplicateStream, index);
  const JointModel model{cfg.bar, cfg.noise, cfg.law, cfg.root_type, cfg.x1};
  const ObservedTree tree = simulate_joint(model, cfg.max_depth(), out.seed);
  out.survived = tree.mask().survives();
  out.rows.resize(cfg.depths.size());
  if (cfg.condition_on_survival && !out.survived) return out;
  for (std::size_t i = 0; i < cfg.depths.size(); ++i) {
    const Generation d = cfg.depths[i];
    if (tree.mask().generation_size(d) == 0) continue;
    try {
      out.rows[i] = eval(tree, d);
    } catch (const DegeneracyError& e) {
      out.failure = e.what();
      out.rows[i].assign(columns, kNaN);
    }
  }
  return out;
}

/// Runs replicate indices [begin, end) on the worker pool; the result
/// vector is indexed by replicate, so the later fold is order-fixed.
std::vector<ReplicateOutcome> run_batch(const McConfig& cfg, std::uint64_t begin, std::uint64_t end,
                                        std::size_t columns, const Evaluator& eval) {
  std::vector<ReplicateOutcome> out(end - begin);
  std::atomic<std::uint64_t> next{begin};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::uint64_t r = next++; r < end; r = next++) {
      try {
        out[r - begin] = run_replicate(cfg, r, columns, eval);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = end;
      }
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::uint64_t>(worker_count(), end - begin));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

Collected simulate_and_collect(const McConfig& cfg, const std::vector<std::string>& names, const Evaluator& eval,
                               McReport& report) {
  cfg.validate();
  Collected col;
  col.names = names;
  col.by_depth.resize(cfg.depths.size());
  report.config = cfg;
  report.columns = {"replicate", "seed_low32", "depth"};
  report.columns.insert(report.columns.end(), names.begin(), names.end());
  report.depth_counts.resize(cfg.depths.size());
  for (std::size_t i = 0; i < cfg.depths.size(); ++i) report.depth_counts[i].depth = cfg.depths[i];

  const Vec2 q = extinction_probabilities(cfg.law);
  report.survival_target = 1.0 - q[cfg.root_type];

  std::uint64_t failures = 0;
  std::string failure_example;
  auto fold = [&](std::uint64_t index, const ReplicateOutcome& o) {
    ++report.attempted;
    if (o.survived) {
      ++report.surviving;
    } else {
      ++report.extinct;
    }
    if (!o.failure.empty()) {
      ++failures;
      if (failure_example.empty()) failure_example = o.failure;
    }
    for (std::size_t i = 0; i < cfg.depths.size(); ++i) {
      if (o.rows[i].empty()) {
        if (!cfg.condition_on_survival || o.survived) ++report.depth_counts[i].extinct;
        continue;
      }
      ++report.depth_counts[i].used;
      col.by_depth[i].push_back(o.rows[i]);
      std::vector<double> row{static_cast<double>(index), static_cast<double>(o.seed & 0xffffffffULL),
                              static_cast<double>(cfg.depths[i])};
      row.insert(row.end(), o.rows[i].begin(), o.rows[i].end());
      report.rows.push_back(std::move(row));
    }
  };

  if (!cfg.condition_on_survival) {
    const auto outcomes = run_batch(cfg, 0, cfg.replicates, names.size(), eval);
    for (std::uint64_t r = 0; r < outcomes.size(); ++r) fold(r, outcomes[r]);
  } else {
    std::uint64_t next = 0;
    const std::uint64_t cap = cfg.attempt_cap();
    while (report.surviving < cfg.replicates && next < cap) {
      const std::uint64_t missing = cfg.replicates - report.surviving;
      const std::uint64_t batch = std::min<std::uint64_t>(cap - next, std::max<std::uint64_t>(missing + missing / 4, 4 * worker_count()));
      const auto outcomes = run_batch(cfg, next, next + batch, names.size(), eval);
      for (std::uint64_t r = 0; r < outcomes.size() && report.surviving < cfg.replicates; ++r) {
        fold(next + r, outcomes[r]);
      }
      next += batch;
    }
    if (report.surviving < cfg.replicates) {
      report.notes.push_back("attempt cap " + std::to_string(cap) + " reached with " +
                             std::to_string(report.surviving) + " surviving replicates");
    }
  }
  if (report.surviving == 0 && cfg.condition_on_survival) {
    throw DegeneracyError("all " + std::to_string(report.attempted) + " replicates went extinct");
  }
  if (std::all_of(report.depth_counts.begin(), report.depth_counts.end(),
                  [](const DepthCount& c) { return c.used == 0; })) {
    throw DegeneracyError("no replicate survived to any configured depth");
  }
  if (failures > 0) {
    report.notes.push_back(std::to_string(failures) + " replicate(s) hit a numerical degeneracy (" +
                           failure_example + "); their affected statistics are excluded");
  }
  if (!cfg.condition_on_survival) {
    const double n = static_cast<double>(report.attempted);
    const double p = report.survival_target;
    const double frac = static_cast<double>(report.surviving) / n;
    const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / n);
    TrackedStatistic s;
    s.name = "survival_fraction";
    s.depth = cfg.max_depth();
    s.summary = "rate";
    s.empirical = frac;
    s.target = p;
    s.low = p - 3.0 * se;
    s.high = 1.0;
    s.tolerance = "above 1 - q minus 3 binomial SE (finite depth survival exceeds eventual survival)";
    s.mc_std_error = se;
    s.count = report.attempted;
    s.informational = true;
    s.pass = s.low <= frac && frac <= s.high;
    report.stats.push_back(s);
  }
  return col;
}

TrackedStatistic band_stat(std::string name, Generation depth, std::string summary, double empirical, double target,
                           double low, double high, std::string tolerance, double se, std::uint64_t count,
                           bool informational = false) {
  TrackedStatistic s;
  s.name = std::move(name);
  s.depth = depth;
  s.summary = std::move(summary);
  s.empirical = empirical;
  s.target = target;
  s.low = low;
  s.high = high;
  s.tolerance = std::move(tolerance);
  s.mc_std_error = se;
  s.count = count;
  s.informational = informational;
  s.pass = std::isfinite(empirical) && low <= empirical && empirical <= high;
  return s;
}

/// Band target +/- max(rel |target|, abs_floor).
TrackedStatistic relative_stat(std::string name, Generation depth, std::string summary, double empirical,
                               double target, double rel, double abs_floor, double se, std::uint64_t count,
                               bool informational = false) {
  const double half = std::max(rel * std::abs(target), abs_floor);
  std::string tol = "max(" + std::to_string(rel) + " * |target|, " + std::to_string(abs_floor) + ")";
  return band_stat(std::move(name), depth, std::move(summary), empirical, target, target - half, target + half,
                   std::move(tol), se, count, informational);
}

double mean_se(const std::vector<double>& xs) {
  return xs.size() > 1 ? std::sqrt(sample_variance(xs) / static_cast<double>(xs.size())) : 0.0;
}

/// Asymptotic standard error of a sample median, with the density at the
/// median estimated from the interquartile range as if normal.
double median_se(std::vector<double> xs) {
  if (xs.size() < 4) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  const double q1 = xs[static_cast<std::size_t>(0.25 * (n - 1))];
  const double q3 = xs[static_cast<std::size_t>(0.75 * (n - 1))];
  const double sd = (q3 - q1) / 1.349;
  return 1.2533 * sd / std::sqrt(n);
}

/// Standard error of a sample variance for near-normal data.
double variance_se(const std::vector<double>& xs) {
  return xs.size() > 1 ? sample_variance(xs) * std::sqrt(2.0 / static_cast<double>(xs.size() - 1)) : 0.0;
}

double rate_se(double p, std::size_t n) { return n ? std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0; }

double sq(double x) { return x * x; }

Vec4 difference(const Vec4& a, const Vec4& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]}; }

double require_supercritical(const ReproductionLaw& law) {
  law.validate();
  const Mat2 P = law.descendants();
  const double tr = P.trace();
  const double disc = sq(P(0, 0) - P(1, 1)) + 4.0 * P(0, 1) * P(1, 0);
  const double pi = 0.5 * (tr + std::sqrt(std::max(disc, 0.0)));
  if (!(pi > 1.0)) {
    throw ValidationError("the observation process is not supercritical (pi = " + std::to_string(pi) +
                          "); the limit theorems do not apply");
  }
  return pi;
}

const char* const kMatrixNames[3] = {"S0", "S1", "S01"};
const char* const kEntryNames[3] = {"00", "01", "11"};
const char* const kThetaNames[4] = {"a", "b", "c", "d"};

}  // namespace

void McConfig::validate() const {
  if (replicates < 1) throw ValidationError("replicates must be >= 1");
  if (depths.empty()) throw ValidationError("at least one depth is required");
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (depths[i] < 2) throw ValidationError("depths must be >= 2");
    if (i > 0 && depths[i] <= depths[i - 1]) throw ValidationError("depths must be strictly ascending");
  }
  check_depth(depths.back());
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0, 1)");
  if (root_type != 0 && root_type != 1) throw ValidationError("root_type must be 0 or 1");
  law.validate();
  noise.validate();
}

bool McReport::pass() const {
  return std::all_of(stats.begin(), stats.end(), [](const TrackedStatistic& s) { return s.informational || s.pass; });
}

const TrackedStatistic* McReport::find(const std::string& name, std::optional<Generation> depth) const {
  for (const auto& s : stats)
    if (s.name == name && (!depth || s.depth == *depth)) return &s;
  return nullptr;
}

unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BARTREE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<unsigned>(std::min<long>(v, 1024));
  }
  return hw;
}

McReport mc_limit_matrices(const McConfig& cfg) {
  require_supercritical(cfg.law);
  const LimitMatrices lim = limit_matrices(cfg.bar, cfg.noise, cfg.law);
  const Mat2 targets[3] = {lim.L0, lim.L1, lim.L01};

  McReport report;
  report.experiment = "limit_matrices";
  std::vector<std::string> names;
  for (const char* m : kMatrixNames)
    for (const char* e : kEntryNames) names.push_back(std::string(m) + "_" + e);
  names.push_back("mean_rel_error");

  const Evaluator eval = [&](const ObservedTree& tree, Generation depth) {
    const DesignMatrices dm = accumulate_design(tree, depth - 1);
    const double obs = static_cast<double>(dm.observed);
    const Mat2 s[3] = {dm.S0, dm.S1, dm.S01};
    std::vector<double> row;
    double err = 0.0;
    for (int m = 0; m < 3; ++m) {
      const double e[3] = {s[m](0, 0) / obs, s[m](0, 1) / obs, s[m](1, 1) / obs};
      const double t[3] = {targets[m](0, 0), targets[m](0, 1), targets[m](1, 1)};
      for (int j = 0; j < 3; ++j) {
        row.push_back(e[j]);
        err += std::abs(e[j] - t[j]) / std::max(std::abs(t[j]), 0.2);
      }
    }
    row.push_back(err / 9.0);
    return row;
  };
  const Collected col = simulate_and_collect(cfg, names, eval, report);

  std::vector<double> trend;
  for (std::size_t di = 0; di < cfg.depths.size(); ++di) {
    const Generation d = cfg.depths[di];
    if (col.by_depth[di].empty()) continue;
    for (int m = 0; m < 3; ++m) {
      const double t[3] = {targets[m](0, 0), targets[m](0, 1), targets[m](1, 1)};
      for (int j = 0; j < 3; ++j) {
        const auto xs = col.column(di, static_cast<std::size_t>(3 * m + j));
        report.stats.push_back(relative_stat(names[3 * m + j], d, "median of S/|T*_{D-1}|", median(xs), t[j], 0.10,
                                             0.02, median_se(xs), xs.size()));
      }
    }
    const auto err = col.column(di, 9);
    trend.push_back(median(err));
    report.stats.push_back(band_stat("median_rel_error", d, "median", trend.back(), 0.0, 0.0, kInf(), "informational",
                                     median_se(err), err.size(), true));
  }
  if (trend.size() >= 2) {
    bool decreasing = true;
    for (std::size_t i = 1; i < trend.size(); ++i) decreasing = decreasing && trend[i] < trend[i - 1];
    report.stats.push_back(band_stat("rel_error_decreasing", cfg.max_depth(), "indicator", decreasing ? 1.0 : 0.0,
                                     1.0, 1.0, 1.0, "median relative error strictly decreasing in depth", 0.0,
                                     trend.size()));
  }
  report.notes.push_back("targets L0, L1, L01 from the closed-form limits; tolerances from pilot calibration");
  return report;
}

McReport mc_consistency_rate(const McConfig& cfg) {
  require_supercritical(cfg.law);
  const Vec4 truth = cfg.bar.as_vector();
  McReport report;
  report.experiment = "consistency_rate";
  const Evaluator eval = [&](const ObservedTree& tree, Generation depth) {
    const ThetaEstimate est = estimate_theta(tree, depth);
    const Vec4 e = difference(est.theta, truth);
    const double n1 = static_cast<double>(est.design.observed);
    const double norm2 = dot(e, e);
    const double rate = n1 > 1.0 ? norm2 * n1 / std::log(n1) : kNaN;
    return std::vector<double>{rate, norm2};
  };
  const Collected col = simulate_and_collect(cfg, {"R", "sq_error"}, eval, report);

  std::vector<std::pair<Generation, double>> medians;
  for (std::size_t di = 0; di < cfg.depths.size(); ++di) {
    if (col.by_depth[di].empty()) continue;
    const auto r = col.column(di, 0);
    medians.emplace_back(cfg.depths[di], median(r));
    report.stats.push_back(band_stat("median_R", cfg.depths[di], "median", medians.back().second, 0.0, 0.0, kInf(),
                                     "informational", median_se(r), r.size(), true));
  }
  if (medians.size() >= 2) {
    const double first = medians.front().second;
    const double last = medians.back().second;
    const double ratio = first > 0.0 ? last / first : (last == 0.0 ? 0.0 : kInf());
    report.stats.push_back(band_stat("R_ratio_last_over_first", medians.back().first, "ratio of medians", ratio, 1.0,
                                     0.0, 2.0, "<= 2 (boundedness proxy)", 0.0, medians.size()));
    bool monotone = true;
    for (std::size_t i = 1; i < medians.size(); ++i)
      monotone = monotone && medians[i].second <= 1.25 * medians[i - 1].second + 1e-12;
    report.stats.push_back(band_stat("R_non_increasing", medians.back().first, "indicator", monotone ? 1.0 : 0.0, 1.0,
                                     1.0, 1.0, "each median <= 1.25 x previous", 0.0, medians.size(), true));
  }
  report.notes.push_back("R_n = ||theta_n - theta||^2 |T*_{n-1}| / log|T*_{n-1}|");
  return report;
}

McReport mc_qsl(const McConfig& cfg) {
  require_supercritical(cfg.law);
  const LimitMatrices lim = limit_matrices(cfg.bar, cfg.noise, cfg.law);
  const Vec4 truth = cfg.bar.as_vector();
  McReport report;
  report.experiment = "qsl";
  const Evaluator eval = [&](const ObservedTree& tree, Generation depth) {
    const ThetaEstimate est = estimate_theta(tree, depth);
    CompensatedSum total, tail;
    const std::size_t half = est.path.size() / 2;
    for (std::size_t l = 0; l < est.path.size(); ++l) {
      const Vec4 e = difference(est.path[l], truth);
      const double term = static_cast<double>(est.path_observed[l]) * dot(e, lim.sigma_lim * e);
      total += term;
      if (l >= half) tail += term;
    }
    return std::vector<double>{total.value() / static_cast<double>(depth),
                               tail.value() / static_cast<double>(est.path.size() - half)};
  };
  const Collected col = simulate_and_collect(cfg, {"qsl", "qsl_tail"}, eval, report);

  for (std::size_t di = 0; di < cfg.depths.size(); ++di) {
    if (col.by_depth[di].empty()) continue;
    const Generation d = cfg.depths[di];
    const auto xs = col.column(di, 0);
    const double m = mean(xs);
    report.stats.push_back(relative_stat("qsl", d, "mean", m, lim.qsl_theta, 0.15, 1e-9, mean_se(xs), xs.size()));
    report.stats.push_back(relative_stat("qsl_vs_4sigma2", d, "mean", m, lim.qsl_martingale, 0.15, 1e-9, mean_se(xs),
                                         xs.size(), true));
    const auto tail = col.column(di, 1);
    report.stats.push_back(relative_stat("qsl_tail_vs_4sigma2", d, "mean", mean(tail), lim.qsl_martingale, 0.15, 1e-9,
                                         mean_se(tail), tail.size(), true));
  }
  report.notes.push_back("qsl target 4 sigma2 (pi - 1) / pi; qsl_vs_4sigma2 compares with the limit of "
                         "(1/n) sum M_l^t Sigma_{l-1}^{-1} M_l, the trace of Sigma^{-1} Gamma; qsl_tail averages the "
                         "terms of the last half of the generations only");
  return report;
}

McReport mc_clt(const McConfig& cfg) {
  require_supercritical(cfg.law);
  const LimitMatrices lim = limit_matrices(cfg.bar, cfg.noise, cfg.law);
  const Vec4 truth = cfg.bar.as_vector();
  const double s2 = cfg.noise.sigma2;
  const double rho = cfg.noise.rho();
  McReport report;
  report.experiment = "clt";

  const std::vector<std::string> names = {"e_a",      "e_b",       "e_c",       "e_d",     "cover_a",
                                          "cover_b",  "cover_c",   "cover_d",   "e_sigma2", "e_rho",
                                          "cover_sigma2", "cover_rho"};
  const Evaluator eval = [&](const ObservedTree& tree, Generation depth) {
    const ThetaEstimate est = estimate_theta(tree, depth);
    std::vector<double> row(names.size(), kNaN);
    const double n1 = std::sqrt(static_cast<double>(est.design.observed));
    for (int j = 0; j < 4; ++j) row[j] = n1 * (est.theta[j] - truth[j]);
    const ThetaInference inf = theta_cis(est, cfg.level);
    for (int j = 0; j < 4; ++j) row[4 + j] = inf.ci[j].covers(truth[j]) ? 1.0 : 0.0;
    row[8] = std::sqrt(static_cast<double>(est.observed)) * (est.sigma2 - s2);
    const NoiseInference ni = sigma_rho_cis(est, LimitsMode::plug_in, nullptr, cfg.level);
    row[10] = ni.sigma2.covers(s2) ? 1.0 : 0.0;
    if (est.rho) {
      row[9] = std::sqrt(static_cast<double>(est.pairs)) * (*est.rho - rho);
      row[11] = ni.rho->covers(rho) ? 1.0 : 0.0;
    }
    return row;
  };
  const Collected col = simulate_and_collect(cfg, names, eval, report);

  const double lo = cfg.level - 0.02;
  const double hi = cfg.level + 0.02;
  const std::string cover_tol = "[level - 0.02, level + 0.02]";
  for (std::size_t di = 0; di < cfg.depths.size(); ++di) {
    if (col.by_depth[di].empty()) continue;
    const Generation d = cfg.depths[di];
    const bool deepest = di + 1 == cfg.depths.size();
    std::vector<std::vector<double>> e(4);
    for (int j = 0; j < 4; ++j) e[j] = col.column(di, static_cast<std::size_t>(j));

    for (int j = 0; j < 4; ++j) {
      const std::string t = kThetaNames[j];
      report.stats.push_back(relative_stat("var_" + t, d, "variance", sample_variance(e[j]), lim.clt_cov_theta(j, j),
                                           0.15, 1e-9, variance_se(e[j]), e[j].size(), !deepest));
      const double sd = std::sqrt(lim.clt_cov_theta(j, j));
      if (sd > 0.0) {
        std::vector<double> z;
        for (double x : e[j]) z.push_back(x / sd);
        const double n = static_cast<double>(z.size());
        const double ks = ks_distance(z, normal_cdf);
        report.stats.push_back(band_stat("ks_normal_" + t, d, "KS distance", ks, 0.0, 0.0, 1.63 / std::sqrt(n) + 0.03,
                                         "<= 1.63/sqrt(N) + 0.03", 0.0, z.size(), !deepest));
      }
      const auto cover = col.column(di, static_cast<std::size_t>(4 + j));
      const double rate = mean(cover);
      report.stats.push_back(band_stat("coverage_" + t, d, "rate", rate, cfg.level, lo, hi, cover_tol,
                                       rate_se(rate, cover.size()), cover.size(), !deepest));
    }
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) {
        const std::size_t n = std::min(e[i].size(), e[j].size());
        const double c = sample_covariance(std::span(e[i]).first(n), std::span(e[j]).first(n));
        const double scale = std::sqrt(lim.clt_cov_theta(i, i) * lim.clt_cov_theta(j, j));
        report.stats.push_back(relative_stat(std::string("cov_") + kThetaNames[i] + kThetaNames[j], d, "covariance", c,
                                             lim.clt_cov_theta(i, j), 0.15, 0.1 * scale, 0.0, n, true));
      }
    if (rho == 0.0) {
      const std::size_t n = std::min(e[0].size(), e[2].size());
      const double r = sample_correlation(std::span(e[0]).first(n), std::span(e[2]).first(n));
      const double bound = 4.0 / std::sqrt(static_cast<double>(n));
      report.stats.push_back(band_stat("corr_even_odd", d, "correlation", r, 0.0, -bound, bound, "|r| < 4/sqrt(N)",
                                       0.0, n, !deepest));
    }

    const auto es = col.column(di, 8);
    report.stats.push_back(relative_stat("var_sigma2", d, "variance", sample_variance(es), lim.clt_var_sigma2, 0.15,
                                         1e-9, variance_se(es), es.size(), !deepest));
    const auto er = col.column(di, 9);
    if (er.size() > 1) {
      report.stats.push_back(relative_stat("var_rho", d, "variance", sample_variance(er), lim.clt_var_rho, 0.15, 1e-9,
                                           variance_se(er), er.size(), !deepest));
    }
    const auto cs = col.column(di, 10);
    const double cs_rate = mean(cs);
    report.stats.push_back(band_stat("coverage_sigma2", d, "rate", cs_rate, cfg.level, lo, hi, cover_tol,
                                     rate_se(cs_rate, cs.size()), cs.size(), !deepest));
    const auto cr = col.column(di, 11);
    if (!cr.empty()) {
      const double cr_rate = mean(cr);
      report.stats.push_back(band_stat("coverage_rho", d, "rate", cr_rate, cfg.level, lo, hi, cover_tol,
                                       rate_se(cr_rate, cr.size()), cr.size(), true));
    }
  }
  report.notes.push_back("e_j = sqrt|T*_{n-1}| (theta_j hat - theta_j); e_sigma2 = sqrt|T*_n| (sigma2 hat - sigma2); "
                         "e_rho = sqrt|T*01_{n-1}| (rho hat - rho)");
  report.notes.push_back("checks apply at the deepest depth; shallower depths are informational");
  return report;
}

McReport mc_variance_estimators(const McConfig& cfg) {
  require_supercritical(cfg.law);
  const LimitMatrices lim = limit_matrices(cfg.bar, cfg.noise, cfg.law);
  McReport report;
  report.experiment = "variance_estimators";
  const Evaluator eval = [&](const ObservedTree& tree, Generation depth) {
    const ThetaEstimate est = estimate_theta(tree, depth);
    const NoiseFunctionals truth = true_noise_functionals(tree, depth);
    const double scale = static_cast<double>(est.observed) / static_cast<double>(depth);
    const double bs = scale * (est.sigma2_predictive - truth.sigma2);
    const double br = est.rho_predictive && truth.rho ? scale * (*est.rho_predictive - *truth.rho) : kNaN;
    return std::vector<double>{bs, br};
  };
  const Collected col = simulate_and_collect(cfg, {"sigma2_bias", "rho_bias"}, eval, report);

  std::vector<double> rho_medians;
  for (std::size_t di = 0; di < cfg.depths.size(); ++di) {
    if (col.by_depth[di].empty()) continue;
    const Generation d = cfg.depths[di];
    const bool deepest = di + 1 == cfg.depths.size();
    const auto bs = col.column(di, 0);
    report.stats.push_back(relative_stat("sigma2_bias", d, "median", median(bs), lim.sigma2_bias, 0.20, 1e-9,
                                         median_se(bs), bs.size(), !deepest));
    const auto br = col.column(di, 1);
    if (!br.empty()) {
      rho_medians.push_back(median(br));
      report.stats.push_back(relative_stat("rho_bias", d, "median", rho_medians.back(), lim.rho_bias, 0.20, 1e-9,
                                           median_se(br), br.size(), true));
      report.stats.push_back(relative_stat("rho_bias_cross_form", d, "median", rho_medians.back(), lim.rho_bias_cross,
                                           0.20, 1e-9, median_se(br), br.size(), true));
    }
  }
  if (rho_medians.size() >= 2) {
    const double last = rho_medians.back();
    const double prev = rho_medians[rho_medians.size() - 2];
    report.stats.push_back(band_stat("rho_bias_step", cfg.max_depth(), "difference of medians", last - prev, 0.0,
                                     -kInf(), kInf(), "informational stabilisation check", 0.0, rho_medians.size(),
                                     true));
  }
  report.notes.push_back("statistics use the predictive residuals; sigma2 target 4 (pi - 1) sigma2; both rho "
                         "constants are informational");
  return report;
}

McReport mc_wald(const McConfig& cfg) {
  require_supercritical(cfg.law);
  const bool null_true = cfg.bar.a == cfg.bar.c && cfg.bar.b == cfg.bar.d;
  const double alpha = 1.0 - cfg.level;
  McReport report;
  report.experiment = "wald";
  const WaldKind kinds[3] = {WaldKind::pair, WaldKind::intercept, WaldKind::slope};
  const Evaluator eval = [&](const ObservedTree& tree, Generation depth) {
    const ThetaEstimate est = estimate_theta(tree, depth);
    const Mat4 cov = plugin_covariance(est);
    std::vector<double> row;
    for (WaldKind k : kinds) {
      try {
        row.push_back(wald_statistic(est.theta, cov, k).p_value);
      } catch (const DegeneracyError&) {
        row.push_back(kNaN);
      }
    }
    return row;
  };
  const Collected col = simulate_and_collect(cfg, {"p_pair", "p_intercept", "p_slope"}, eval, report);

  for (std::size_t di = 0; di < cfg.depths.size(); ++di) {
    if (col.by_depth[di].empty()) continue;
    const Generation d = cfg.depths[di];
    const bool deepest = di + 1 == cfg.depths.size();
    for (int t = 0; t < 3; ++t) {
      const auto p = col.column(di, static_cast<std::size_t>(t));
      double rejections = 0.0;
      for (double x : p) rejections += x < alpha ? 1.0 : 0.0;
      const double rate = p.empty() ? kNaN : rejections / static_cast<double>(p.size());
      const std::string name = wald_name(kinds[t]);
      if (null_true) {
        report.stats.push_back(band_stat("size_" + name, d, "rate", rate, alpha, alpha - 0.02, alpha + 0.02,
                                         "[alpha - 0.02, alpha + 0.02]", rate_se(rate, p.size()), p.size(),
                                         !deepest));
        const double ks = ks_distance(p, [](double u) { return std::clamp(u, 0.0, 1.0); });
        report.stats.push_back(band_stat("ks_uniform_" + name, d, "KS distance", ks, 0.0, 0.0, 0.05, "< 0.05", 0.0,
                                         p.size(), !deepest));
      } else {
        report.stats.push_back(band_stat("power_" + name, d, "rate", rate, 1.0, 0.5, 1.0, "> 0.5",
                                         rate_se(rate, p.size()), p.size(),
                                         !deepest || kinds[t] == WaldKind::intercept));
      }
    }
  }
  report.notes.push_back(null_true ? "symmetric truth: size and p-value uniformity checks"
                                   : "asymmetric truth: power checks on the pair and slope tests");
  return report;
}

Experiment parse_experiment(const std::string& name) {
  if (name == "limit_matrices") return Experiment::limit_matrices;
  if (name == "consistency_rate") return Experiment::consistency_rate;
  if (name == "qsl") return Experiment::qsl;
  if (name == "clt") return Experiment::clt;
  if (name == "variance_estimators") return Experiment::variance_estimators;
  if (name == "wald") return Experiment::wald;
  throw ValidationError("unknown experiment '" + name +
                        "' (expected limit_matrices, consistency_rate, qsl, clt, variance_estimators or wald)");
}

const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::limit_matrices:
      return "limit_matrices";
    case Experiment::consistency_rate:
      return "consistency_rate";
    case Experiment::qsl:
      return "qsl";
    case Experiment::clt:
      return "clt";
    case Experiment::variance_estimators:
      return "variance_estimators";
    case Experiment::wald:
      return "wald";
  }
  return "?";
}

McReport run_experiment(Experiment e, const McConfig& cfg) {
  switch (e) {
    case Experiment::limit_matrices:
      return mc_limit_matrices(cfg);
    case Experiment::consistency_rate:
      return mc_consistency_rate(cfg);
    case Experiment::qsl:
      return mc_qsl(cfg);
    case Experiment::clt:
      return mc_clt(cfg);
    case Experiment::variance_estimators:
      return mc_variance_estimators(cfg);
    case Experiment::wald:
      return mc_wald(cfg);
  }
  throw ValidationError("unknown experiment");
}

}  // namespace bartree
