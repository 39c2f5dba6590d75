#pragma once

#include <bit>
#include <cstdint>
#include <utility>

#include "bartree/errors.hpp"

namespace bartree {

/// Node label on the binary tree: root is 1, children of k are 2k and 2k+1.
using NodeId = std::uint64_t;

/// Generation index n; generation n holds the ids 2^n .. 2^{n+1}-1.
using Generation = unsigned;

/// Deepest generation any simulation or file may reach.
inline constexpr Generation kMaxDepth = 40;

NodeId mother(NodeId k);

/// floor(log2 k) computed from the bit length.
inline Generation generation_of(NodeId k) {
  if (k == 0) throw ValidationError("node id 0 is not a tree node");
  return static_cast<Generation>(std::bit_width(k) - 1);
}

/// Inclusive id bounds (2^n, 2^{n+1}-1) of generation n.
std::pair<NodeId, NodeId> generation_range(Generation n);

/// |T_n| = 2^{n+1} - 1.
std::uint64_t subtree_size(Generation n);

/// Type of a node by its label: even ids are type 0, odd ids type 1.
inline int parity(NodeId k) { return static_cast<int>(k & 1U); }

inline NodeId child(NodeId k, int type) { return 2 * k + static_cast<NodeId>(type); }

void check_depth(Generation n);

}  // namespace bartree
