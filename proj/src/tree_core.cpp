#include "bartree/tree_core.hpp"

#include <string>

namespace bartree {

NodeId mother(NodeId k) {
  if (k < 2) throw ValidationError("node " + std::to_string(k) + " has no mother");
  return k / 2;
}

void check_depth(Generation n) {
  if (n > kMaxDepth) {
    throw CapacityError("generation " + std::to_string(n) + " exceeds the supported depth " +
                        std::to_string(kMaxDepth));
  }
}

std::pair<NodeId, NodeId> generation_range(Generation n) {
  check_depth(n);
  const NodeId first = NodeId{1} << n;
  return {first, 2 * first - 1};
}

std::uint64_t subtree_size(Generation n) {
  check_depth(n);
  return (std::uint64_t{1} << (n + 1)) - 1;
}

}  // namespace bartree
