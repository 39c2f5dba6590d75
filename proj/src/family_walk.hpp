#pragma once

#include "bartree/bar_process.hpp"

namespace bartree::detail {

/// Observed child slot of a mother; index into the next generation's arrays.
struct ChildSlot {
  bool present = false;
  std::size_t index = 0;
};

/// Calls f(mother_index, mother_id, children[2]) for every observed mother in
/// generation g, with children looked up in generation g + 1 by a merge walk.
template <typename F>
void for_each_family(const ObservationMask& mask, Generation g, F&& f) {
  const auto mothers = mask.generation(g);
  const auto kids = mask.generation(g + 1);
  std::size_t j = 0;
  for (std::size_t i = 0; i < mothers.size(); ++i) {
    const NodeId k = mothers[i];
    ChildSlot slots[2];
    while (j < kids.size() && kids[j] / 2 == k) {
      slots[parity(kids[j])] = {true, j};
      ++j;
    }
    f(i, k, slots);
  }
}

}  // namespace bartree::detail
