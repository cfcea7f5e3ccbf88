#include "lesioneval/components.hpp"

#include <algorithm>

#include "lesioneval/errors.hpp"

namespace lesioneval {
namespace {

struct Offset {
  int dx, dy, dz;
};

std::vector<Offset> neighborhood(int connectivity) {
  std::vector<Offset> offsets;
  if (connectivity == 6) {
    offsets = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
  } else if (connectivity == 26) {
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          if (dx != 0 || dy != 0 || dz != 0) offsets.push_back({dx, dy, dz});
  } else {
    throw ContractError("connectivity must be 6 or 26, got " + std::to_string(connectivity));
  }
  return offsets;
}

}  // namespace

std::vector<LesionComponent> connected_components(const BinaryMask& mask, int connectivity) {
  const std::vector<Offset> offsets = neighborhood(connectivity);
  const GridGeometry& g = mask.geometry;
  const std::size_t n = mask.bits.size();

  std::vector<int> label(n, -1);
  std::vector<LesionComponent> components;
  std::vector<std::size_t> stack;

  // A linear scan guarantees ids ascend with each component's smallest index.
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (mask.bits[seed] == 0 || label[seed] != -1) continue;
    const int id = static_cast<int>(components.size()) + 1;
    LesionComponent comp;
    comp.id = id;
    label[seed] = id;
    stack.assign(1, seed);
    while (!stack.empty()) {
      const std::size_t at = stack.back();
      stack.pop_back();
      comp.voxel_indices.push_back(at);
      const std::array<int, 3> c = g.coords(at);
      for (const Offset& o : offsets) {
        const int x = c[0] + o.dx, y = c[1] + o.dy, z = c[2] + o.dz;
        if (!g.in_bounds(x, y, z)) continue;
        const std::size_t ni = g.linear_index(x, y, z);
        if (mask.bits[ni] != 0 && label[ni] == -1) {
          label[ni] = id;
          stack.push_back(ni);
        }
      }
    }
    std::sort(comp.voxel_indices.begin(), comp.voxel_indices.end());
    components.push_back(std::move(comp));
  }
  return components;
}

}  // namespace lesioneval
