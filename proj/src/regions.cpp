#include "lesioneval/regions.hpp"

#include <algorithm>
#include <cctype>

#include "lesioneval/errors.hpp"

namespace lesioneval {

const char* region_name(RegionKind region) {
  switch (region) {
    case RegionKind::ET: return "ET";
    case RegionKind::TC: return "TC";
    case RegionKind::WT: return "WT";
  }
  return "?";
}

RegionKind parse_region(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "ET") return RegionKind::ET;
  if (upper == "TC") return RegionKind::TC;
  if (upper == "WT") return RegionKind::WT;
  throw UsageError("unknown region '" + std::string(name) + "' (expected ET, TC or WT)");
}

bool region_contains_label(RegionKind region, std::uint8_t label) {
  switch (region) {
    case RegionKind::ET: return label == kLabelEnhancing;
    case RegionKind::TC: return label == kLabelEnhancing || label == kLabelNonEnhancing;
    case RegionKind::WT: return label != kLabelBackground;
  }
  return false;
}

BinaryMask compose_region(const LabelVolume& vol, RegionKind region) {
  // Per-label membership table; labels are already validated to <= 3.
  std::array<std::uint8_t, 4> member{};
  for (std::uint8_t label = 0; label <= kMaxLabel; ++label)
    member[label] = region_contains_label(region, label) ? 1 : 0;

  BinaryMask mask;
  mask.geometry = vol.geometry();
  mask.region = region;
  mask.bits.resize(vol.voxels().size());
  const auto& voxels = vol.voxels();
  for (std::size_t i = 0; i < voxels.size(); ++i) mask.bits[i] = member[voxels[i]];
  return mask;
}

std::size_t mask_volume_voxels(const BinaryMask& mask) {
  std::size_t count = 0;
  for (std::uint8_t b : mask.bits) count += b != 0;
  return count;
}

}  // namespace lesioneval
