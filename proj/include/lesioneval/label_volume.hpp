#ifndef LESIONEVAL_LABEL_VOLUME_HPP
#define LESIONEVAL_LABEL_VOLUME_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "lesioneval/geometry.hpp"

namespace lesioneval {

// Distributed label scheme: 0 background, 1 non-enhancing component,
// 2 peritumoral edema, 3 enhancing tumor.
inline constexpr std::uint8_t kLabelBackground = 0;
inline constexpr std::uint8_t kLabelNonEnhancing = 1;
inline constexpr std::uint8_t kLabelEdema = 2;
inline constexpr std::uint8_t kLabelEnhancing = 3;
inline constexpr std::uint8_t kMaxLabel = 3;

/// A dense 3D grid of tumor labels, immutable after construction.
/// Construction validates the label domain; a LabelVolume that exists is
/// always well formed.
class LabelVolume {
public:
  /// Throws UsageError on bad geometry, ContractError on a size mismatch,
  /// LabelDomainError on any voxel outside {0,1,2,3}.
  LabelVolume(GridGeometry geometry, std::vector<std::uint8_t> voxels);

  const GridGeometry& geometry() const { return geom_; }
  const std::array<int, 3>& dims() const { return geom_.dims; }
  const std::array<double, 3>& spacing() const { return geom_.spacing; }
  const std::vector<std::uint8_t>& voxels() const { return voxels_; }

  std::uint8_t at(int x, int y, int z) const { return voxels_[geom_.linear_index(x, y, z)]; }

  bool operator==(const LabelVolume&) const = default;

private:
  GridGeometry geom_;
  std::vector<std::uint8_t> voxels_;
};

}  // namespace lesioneval

#endif
