#ifndef LESIONEVAL_MORPHOLOGY_HPP
#define LESIONEVAL_MORPHOLOGY_HPP

#include "lesioneval/regions.hpp"

namespace lesioneval {

/// Binary dilation by `iterations` successive passes of the full 3x3x3
/// structuring element (equivalently a Chebyshev ball of radius
/// `iterations`). No wrap-around: the grid boundary clips the element.
/// iterations == 0 returns the input unchanged.
BinaryMask dilate(const BinaryMask& mask, int iterations);

/// Binary erosion by `iterations` passes of the 3x3x3 element; voxels
/// outside the grid count as background, so the boundary erodes inward.
BinaryMask erode(const BinaryMask& mask, int iterations);

}  // namespace lesioneval

#endif
