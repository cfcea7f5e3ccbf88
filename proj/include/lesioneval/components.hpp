#ifndef LESIONEVAL_COMPONENTS_HPP
#define LESIONEVAL_COMPONENTS_HPP

#include <cstddef>
#include <vector>

#include "lesioneval/regions.hpp"

namespace lesioneval {

/// One disjoint lesion: a connected set of voxels, stored as sorted linear
/// indices. ids start at 1.
struct LesionComponent {
  int id = 0;
  std::vector<std::size_t> voxel_indices;

  std::size_t voxel_count() const { return voxel_indices.size(); }
};

/// Labels the set voxels of `mask` into connected components under the
/// 6- or 26-neighborhood. Components partition the set bits; ids are
/// assigned in ascending order of each component's smallest linear index;
/// voxel_indices come out sorted. Throws ContractError for any other
/// connectivity value.
std::vector<LesionComponent> connected_components(const BinaryMask& mask, int connectivity);

}  // namespace lesioneval

#endif
