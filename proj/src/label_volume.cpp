#include "lesioneval/label_volume.hpp"

#include <string>

#include "lesioneval/errors.hpp"

namespace lesioneval {

LabelVolume::LabelVolume(GridGeometry geometry, std::vector<std::uint8_t> voxels)
    : geom_(geometry), voxels_(std::move(voxels)) {
  validate_geometry(geom_);
  if (voxels_.size() != geom_.voxel_count()) {
    throw ContractError("voxel buffer holds " + std::to_string(voxels_.size()) +
                        " values but the grid needs " + std::to_string(geom_.voxel_count()));
  }
  for (std::size_t i = 0; i < voxels_.size(); ++i) {
    if (voxels_[i] > kMaxLabel) {
      throw LabelDomainError("label value " + std::to_string(int(voxels_[i])) +
                             " at voxel index " + std::to_string(i) +
                             " is outside {0,1,2,3}");
    }
  }
}

}  // namespace lesioneval
