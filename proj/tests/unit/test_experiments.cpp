#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>

#include "bartree/experiments.hpp"
#include "bartree/io.hpp"
#include "test_support.hpp"

using namespace bartree;

namespace {

McConfig small_config() {
  McConfig cfg;
  cfg.bar = BarParams(1, 0.5, 2, 0.25);
  cfg.noise = NoiseParams(1.0, 0.5);
  cfg.law = fixtures::dense_law();
  cfg.depths = {6, 8};
  cfg.replicates = 40;
  cfg.seed = 77;
  return cfg;
}

class ThreadEnv {
 public:
  explicit ThreadEnv(const char* value) {
    if (const char* v = std::getenv("BARTREE_THREADS")) saved_ = v;
    ::setenv("BARTREE_THREADS", value, 1);
  }
  ~ThreadEnv() {
    if (saved_.empty()) {
      ::unsetenv("BARTREE_THREADS");
    } else {
      ::setenv("BARTREE_THREADS", saved_.c_str(), 1);
    }
  }

 private:
  std::string saved_;
};

}  // namespace

TEST(McConfig, Validation) {
  McConfig cfg = small_config();
  EXPECT_NO_THROW(cfg.validate());
  cfg.depths = {8, 6};
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = small_config();
  cfg.depths = {};
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = small_config();
  cfg.replicates = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = small_config();
  cfg.level = 1.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  EXPECT_EQ(small_config().attempt_cap(), 50u * 40u + 100u);
}

TEST(Experiments, Names) {
  for (Experiment e : {Experiment::limit_matrices, Experiment::consistency_rate, Experiment::qsl, Experiment::clt,
                       Experiment::variance_estimators, Experiment::wald}) {
    EXPECT_EQ(parse_experiment(experiment_name(e)), e);
  }
  EXPECT_THROW(parse_experiment("bogus"), ValidationError);
}

TEST(Experiments, BitForBitDeterminism) {
  const McConfig cfg = small_config();
  const std::string a = report_to_json(mc_clt(cfg));
  const std::string b = report_to_json(mc_clt(cfg));
  EXPECT_EQ(a, b);
  McConfig other = cfg;
  other.seed = 78;
  EXPECT_NE(a, report_to_json(mc_clt(other)));
}

TEST(Experiments, ThreadCountInvariance) {
  const McConfig cfg = small_config();
  std::string one, many;
  {
    ThreadEnv env("1");
    EXPECT_EQ(worker_count(), 1u);
    one = report_to_json(mc_variance_estimators(cfg));
  }
  {
    ThreadEnv env("4");
    EXPECT_EQ(worker_count(), 4u);
    many = report_to_json(mc_variance_estimators(cfg));
  }
  EXPECT_EQ(one, many);
}

TEST(Experiments, SubcriticalRejected) {
  McConfig cfg = small_config();
  cfg.law = ReproductionLaw::symmetric({0.5, 0.2, 0.2, 0.1});
  EXPECT_THROW(mc_limit_matrices(cfg), ValidationError);
  EXPECT_THROW(mc_qsl(cfg), ValidationError);
}

TEST(Experiments, ExtinctionBookkeeping) {
  McConfig cfg = small_config();
  cfg.law = fixtures::sparse_law();
  cfg.condition_on_survival = false;
  cfg.replicates = 200;
  const McReport r = mc_limit_matrices(cfg);
  EXPECT_EQ(r.attempted, 200u);
  EXPECT_EQ(r.surviving + r.extinct, r.attempted);
  EXPECT_GT(r.extinct, 0u);
  for (const DepthCount& c : r.depth_counts) EXPECT_EQ(c.used + c.extinct, r.attempted);
  EXPECT_LE(r.depth_counts[1].used, r.depth_counts[0].used);
  const TrackedStatistic* s = r.find("survival_fraction");
  ASSERT_NE(s, nullptr);
  EXPECT_TRUE(s->informational);
  EXPECT_EQ(r.rows.size(), r.depth_counts[0].used + r.depth_counts[1].used);
}

TEST(Experiments, ConditioningCollectsSurvivors) {
  McConfig cfg = small_config();
  cfg.law = fixtures::sparse_law();
  const McReport r = mc_limit_matrices(cfg);
  EXPECT_EQ(r.surviving, cfg.replicates);
  EXPECT_EQ(r.depth_counts.back().used, cfg.replicates);
  EXPECT_GE(r.attempted, r.surviving);
}

TEST(Experiments, AttemptCapStopsCollection) {
  McConfig cfg = small_config();
  cfg.law = fixtures::sparse_law();
  cfg.max_attempts = 10;
  cfg.replicates = 100;
  const McReport r = mc_limit_matrices(cfg);
  EXPECT_EQ(r.attempted, 10u);
  EXPECT_FALSE(r.notes.empty());
}

TEST(Experiments, ZeroNoiseCltErrorsVanish) {
  McConfig cfg = small_config();
  cfg.noise = NoiseParams(0.0, 0.0);
  cfg.law = ReproductionLaw::full_observation();
  cfg.x1 = 0.3;
  cfg.replicates = 3;
  const McReport r = mc_clt(cfg);
  const std::size_t first = 3;
  for (const auto& row : r.rows)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(row[first + j], 0.0, 1e-8);
}

TEST(Experiments, ZeroNoiseLimitMatrices) {
  // Noise-free recursion with b != d started at the stationary mean: the
  // normalised design sums reach their limits up to a geometric remainder.
  McConfig cfg;
  cfg.bar = BarParams(1.0, 0.5, 1.0, 0.45);
  cfg.noise = NoiseParams(0.0, 0.0);
  cfg.law = ReproductionLaw::full_observation();
  cfg.x1 = 2.0 / (2.0 - 0.5 - 0.45);
  cfg.depths = {14};
  cfg.replicates = 1;
  const McReport r = mc_limit_matrices(cfg);
  const LimitMatrices lim = limit_matrices(cfg.bar, cfg.noise, cfg.law);
  const Mat2 targets[3] = {lim.L0, lim.L1, lim.L01};
  const char* names[3] = {"S0", "S1", "S01"};
  const char* entries[3] = {"00", "01", "11"};
  const int idx[3][2] = {{0, 0}, {0, 1}, {1, 1}};
  for (int m = 0; m < 3; ++m)
    for (int e = 0; e < 3; ++e) {
      const TrackedStatistic* s = r.find(std::string(names[m]) + "_" + entries[e], 14);
      ASSERT_NE(s, nullptr);
      const double t = targets[m](idx[e][0], idx[e][1]);
      EXPECT_NEAR(s->empirical, t, 1e-6 * std::abs(t)) << s->name;
    }
}

TEST(Experiments, ReportLookupAndPass) {
  McReport r;
  TrackedStatistic a;
  a.name = "x";
  a.depth = 5;
  a.pass = true;
  TrackedStatistic b = a;
  b.name = "y";
  b.pass = false;
  b.informational = true;
  r.stats = {a, b};
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.find("x", 5), &r.stats[0]);
  EXPECT_EQ(r.find("x", 6), nullptr);
  r.stats[1].informational = false;
  EXPECT_FALSE(r.pass());
}
