#ifndef LESIONEVAL_REGIONS_HPP
#define LESIONEVAL_REGIONS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lesioneval/label_volume.hpp"

namespace lesioneval {

/// The three evaluation regions. Composition over labels:
///   ET = {3}, TC = {1,3}, WT = {1,2,3}.
enum class RegionKind { ET = 0, TC = 1, WT = 2 };

inline constexpr std::array<RegionKind, 3> kAllRegions{RegionKind::ET, RegionKind::TC,
                                                       RegionKind::WT};

const char* region_name(RegionKind region);

/// Parses "ET"/"TC"/"WT" (case-insensitive); throws UsageError otherwise.
RegionKind parse_region(std::string_view name);

bool region_contains_label(RegionKind region, std::uint8_t label);

/// One evaluation region as a boolean grid (1 byte per voxel, x-fastest).
/// region is empty for masks that were not derived from a label volume.
struct BinaryMask {
  GridGeometry geometry;
  std::optional<RegionKind> region;
  std::vector<std::uint8_t> bits;

  bool test(std::size_t linear) const { return bits[linear] != 0; }
  bool operator==(const BinaryMask&) const = default;
};

/// Sets a bit wherever the voxel label belongs to the region's composition
/// set; geometry is copied from the volume.
BinaryMask compose_region(const LabelVolume& vol, RegionKind region);

/// Number of set bits.
std::size_t mask_volume_voxels(const BinaryMask& mask);

}  // namespace lesioneval

#endif
