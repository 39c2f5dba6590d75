#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "bartree/gw_observation.hpp"
#include "bartree/rng.hpp"
#include "test_support.hpp"

using namespace bartree;
using bartree::fixtures::dense_law;
using bartree::fixtures::sparse_law;

TEST(Spectral, FullObservationExact) {
  const GWSpectral s = spectral(ReproductionLaw::full_observation());
  EXPECT_EQ(s.pi, 2.0);
  EXPECT_EQ(s.z[0], 0.5);
  EXPECT_EQ(s.z[1], 0.5);
  EXPECT_EQ(s.pbar11, 1.0);
  EXPECT_TRUE(s.supercritical);
  EXPECT_EQ(s.q[0], 0.0);
}

TEST(Spectral, SparseLawMatchesEigen) {
  const ReproductionLaw law = sparse_law();
  const GWSpectral s = spectral(law);
  EXPECT_NEAR(s.P(0, 0), 0.9, 1e-15);
  EXPECT_NEAR(s.P(0, 1), 0.4, 1e-15);
  EXPECT_NEAR(s.P(1, 0), 0.3, 1e-15);
  EXPECT_NEAR(s.P(1, 1), 0.8, 1e-15);
  EXPECT_NEAR(s.pi, 1.2, 1e-12);

  Eigen::EigenSolver<Eigen::Matrix2d> es(fixtures::to_eigen(s.P));
  double top = -1.0;
  for (int i = 0; i < 2; ++i) top = std::max(top, es.eigenvalues()(i).real());
  EXPECT_NEAR(s.pi, top, 1e-13);

  // z P = pi z, P y = pi y, z . 1 = 1, z . y = 1.
  const Eigen::RowVector2d z(s.z[0], s.z[1]);
  const Eigen::Vector2d y(s.y[0], s.y[1]);
  const Eigen::Matrix2d P = fixtures::to_eigen(s.P);
  EXPECT_NEAR((z * P - s.pi * z).norm(), 0.0, 1e-14);
  EXPECT_NEAR((P * y - s.pi * y).norm(), 0.0, 1e-14);
  EXPECT_NEAR(z.sum(), 1.0, 1e-15);
  EXPECT_NEAR(z * y, 1.0, 1e-14);
}

TEST(Spectral, SubcriticalIsAFlag) {
  const ReproductionLaw law = ReproductionLaw::symmetric({0.5, 0.2, 0.2, 0.1});
  const GWSpectral s = spectral(law);
  EXPECT_FALSE(s.supercritical);
  EXPECT_NEAR(s.q[0], 1.0, 1e-6);
}

TEST(Spectral, ZeroEntryRejected) {
  ReproductionLaw law;
  law.type[0] = {0.0, 1.0, 0.0, 0.0};
  law.type[1] = {0.0, 0.0, 1.0, 0.0};
  EXPECT_THROW(spectral(law), ValidationError);
}

TEST(Spectral, InvalidLawRejected) {
  EXPECT_THROW(ReproductionLaw::symmetric({0.5, 0.5, 0.5, -0.5}).validate(), ValidationError);
  EXPECT_THROW(ReproductionLaw::symmetric({0.5, 0.2, 0.2, 0.2}).validate(), ValidationError);
}

TEST(Extinction, SymmetricThreeQuarterLaw) {
  const ReproductionLaw law = ReproductionLaw::symmetric({0.25, 0.0, 0.0, 0.75});
  const Vec2 q = extinction_probabilities(law);
  EXPECT_NEAR(q[0], 1.0 / 3.0, 1e-10);
  EXPECT_NEAR(q[1], 1.0 / 3.0, 1e-10);
}

TEST(Extinction, FixedPointProperty) {
  const ReproductionLaw law = dense_law();
  const Vec2 q = extinction_probabilities(law);
  EXPECT_NEAR(law.type[0].generating(q[0], q[1]), q[0], 1e-11);
  EXPECT_NEAR(law.type[1].generating(q[0], q[1]), q[1], 1e-11);
  EXPECT_LT(q[0], 1.0);
}

TEST(ObservationMask, ValidatesInput) {
  EXPECT_NO_THROW(ObservationMask({1, 2, 3, 5}, 2));
  EXPECT_THROW(ObservationMask({1, 5}, 2), ValidationError);
  EXPECT_THROW(ObservationMask({2, 4}, 2), ValidationError);
  EXPECT_THROW(ObservationMask({1, 2, 2}, 1), ValidationError);
  EXPECT_THROW(ObservationMask({1, 2, 4}, 1), ValidationError);
  EXPECT_THROW(ObservationMask({1}, 41), CapacityError);
}

TEST(ObservationMask, Counts) {
  const ObservationMask m({1, 3, 2, 5, 6, 7}, 2);
  EXPECT_EQ(m.generation_size(0), 1u);
  EXPECT_EQ(m.generation_size(1), 2u);
  EXPECT_EQ(m.generation_size(2), 3u);
  EXPECT_EQ(m.subtree_count(1), 3u);
  EXPECT_EQ(m.size(), 6u);
  EXPECT_EQ(m.type_count(2, 0), 1u);
  EXPECT_EQ(m.type_count(2, 1), 2u);
  EXPECT_TRUE(m.contains(5));
  EXPECT_FALSE(m.contains(4));
  EXPECT_FALSE(m.extinct());
  EXPECT_TRUE(m.survives());
  EXPECT_EQ(m.nodes(), (std::vector<NodeId>{1, 2, 3, 5, 6, 7}));

  const ObservationMask dead({1, 2}, 3);
  EXPECT_TRUE(dead.extinct());
  EXPECT_FALSE(dead.survives());
}

TEST(SimulateMask, DeterministicAndPrefixClosed) {
  const ReproductionLaw law = dense_law();
  const ObservationMask a = simulate_mask(law, 10, 0, 99);
  const ObservationMask b = simulate_mask(law, 10, 0, 99);
  EXPECT_EQ(a.nodes(), b.nodes());
  const auto nodes = a.nodes();
  // Revalidate through the checking constructor.
  EXPECT_NO_THROW(ObservationMask(nodes, 10));
  const ObservationMask full = simulate_mask(ReproductionLaw::full_observation(), 6, 0, 1);
  EXPECT_EQ(full.size(), subtree_size(6));
}

TEST(SimulateMask, GenerationMeansFollowP) {
  // E[Z_{n+1}] = E[Z_n] P, starting from the root type.
  const ReproductionLaw law = sparse_law();
  const Mat2 P = law.descendants();
  const int reps = 4000;
  const Generation depth = 5;
  double z0 = 0.0, z1 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const ObservationMask m = simulate_mask(law, depth, 0, derive_seed(5, kReplicateStream, r));
    z0 += static_cast<double>(m.type_count(depth, 0)) / reps;
    z1 += static_cast<double>(m.type_count(depth, 1)) / reps;
  }
  Vec2 e{1.0, 0.0};
  for (Generation g = 0; g < depth; ++g) e = P.transpose() * e;
  EXPECT_NEAR(z0, e[0], 0.08 * e[0] + 0.02);
  EXPECT_NEAR(z1, e[1], 0.08 * e[1] + 0.02);
}

TEST(EstimatePi, FullMaskGivesTwo) {
  for (Generation n : {1u, 3u, 8u}) {
    const ObservationMask m = simulate_mask(ReproductionLaw::full_observation(), n, 0, 3);
    const PiEstimate p = estimate_pi(m);
    EXPECT_EQ(p.pi_hat, 2.0);
    EXPECT_EQ(p.std_error, 0.0);
  }
}

TEST(EstimatePi, RatioAndErrors) {
  const ObservationMask m({1, 2, 3, 5}, 2);
  EXPECT_DOUBLE_EQ(estimate_pi(m).pi_hat, 3.0 / 3.0);
  EXPECT_THROW(estimate_pi(ObservationMask({1}, 2)), ExtinctionError);
  const PiEstimate wide = estimate_pi(simulate_mask(dense_law(), 8, 0, 4), 0.99);
  const PiEstimate narrow = estimate_pi(simulate_mask(dense_law(), 8, 0, 4), 0.90);
  EXPECT_LE(wide.low, narrow.low);
  EXPECT_GE(wide.high, narrow.high);
}

TEST(EstimatePi, ConsistentOnLargeTrees) {
  const ReproductionLaw law = dense_law();
  const GWSpectral s = spectral(law);
  const ObservationMask m = simulate_mask(law, 16, 0, 12345);
  ASSERT_TRUE(m.survives());
  const PiEstimate p = estimate_pi(m);
  EXPECT_NEAR(p.pi_hat, s.pi, 0.03);
}

TEST(Renormalized, FullTree) {
  const ObservationMask m = simulate_mask(ReproductionLaw::full_observation(), 5, 0, 1);
  const RenormalizedPopulation w = renormalized_population(m, 2.0);
  EXPECT_DOUBLE_EQ(w.by_generation, 1.0);
  EXPECT_DOUBLE_EQ(w.by_subtree, 1.0);
  EXPECT_THROW(renormalized_population(m, 1.0), ValidationError);
}
