#include <gtest/gtest.h>

#include "bartree/tree_core.hpp"

using namespace bartree;

TEST(TreeCore, MotherAndGeneration) {
  EXPECT_EQ(mother(2), 1u);
  EXPECT_EQ(mother(3), 1u);
  EXPECT_EQ(mother(13), 6u);
  EXPECT_THROW(mother(1), ValidationError);
  EXPECT_EQ(generation_of(1), 0u);
  EXPECT_EQ(generation_of(2), 1u);
  EXPECT_EQ(generation_of(3), 1u);
  EXPECT_EQ(generation_of(7), 2u);
  EXPECT_EQ(generation_of(8), 3u);
  EXPECT_EQ(generation_of(663), 9u);
  EXPECT_THROW(generation_of(0), ValidationError);
}

TEST(TreeCore, GenerationRangesAndSizes) {
  EXPECT_EQ(generation_range(0), std::make_pair(NodeId{1}, NodeId{1}));
  EXPECT_EQ(generation_range(3), std::make_pair(NodeId{8}, NodeId{15}));
  EXPECT_EQ(subtree_size(0), 1u);
  EXPECT_EQ(subtree_size(9), 1023u);
  EXPECT_EQ(subtree_size(40), (std::uint64_t{1} << 41) - 1);
  EXPECT_THROW(generation_range(41), CapacityError);
  EXPECT_THROW(check_depth(41), CapacityError);
}

TEST(TreeCore, ChildrenAndParity) {
  for (NodeId k = 1; k < 5000; ++k) {
    EXPECT_EQ(mother(child(k, 0)), k);
    EXPECT_EQ(mother(child(k, 1)), k);
    EXPECT_EQ(parity(child(k, 0)), 0);
    EXPECT_EQ(parity(child(k, 1)), 1);
    EXPECT_EQ(generation_of(child(k, 1)), generation_of(k) + 1);
  }
}
