#ifndef LESIONEVAL_GEOMETRY_HPP
#define LESIONEVAL_GEOMETRY_HPP

#include <array>
#include <cstddef>
#include <string>

namespace lesioneval {

/// Two grids are considered identical when dims match exactly and spacing
/// matches within this many millimetres per axis.
inline constexpr double kSpacingToleranceMm = 1e-6;

/// Voxel grid shape plus physical voxel size in millimetres.
/// Voxel data indexed x-fastest: linear = x + nx*(y + ny*z).
struct GridGeometry {
  std::array<int, 3> dims{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }

  std::size_t linear_index(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
  }

  std::array<int, 3> coords(std::size_t linear) const {
    const std::size_t nx = static_cast<std::size_t>(dims[0]);
    const std::size_t ny = static_cast<std::size_t>(dims[1]);
    return {static_cast<int>(linear % nx), static_cast<int>((linear / nx) % ny),
            static_cast<int>(linear / (nx * ny))};
  }

  bool in_bounds(int x, int y, int z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < dims[0] && y < dims[1] && z < dims[2];
  }

  bool operator==(const GridGeometry&) const = default;
};

/// True when dims match exactly and spacing matches within kSpacingToleranceMm.
bool geometry_compatible(const GridGeometry& a, const GridGeometry& b);

/// "dims (240,240,155) spacing (1,1,1) mm" -- used in diagnostics.
std::string describe_geometry(const GridGeometry& g);

/// Throws UsageError unless dims >= 1 and spacing > 0 on every axis.
void validate_geometry(const GridGeometry& g);

}  // namespace lesioneval

#endif
