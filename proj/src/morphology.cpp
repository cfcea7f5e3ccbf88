#include "lesioneval/morphology.hpp"

#include <algorithm>

namespace lesioneval {
namespace {

// The 3x3x3 box element is separable: one pass is a radius-1 running OR
// (dilate) or AND (erode) along x, then y, then z.

void pass_axis_or(const std::vector<std::uint8_t>& in, std::vector<std::uint8_t>& out,
                  const GridGeometry& g, int axis) {
  const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
  const std::size_t stride = axis == 0 ? 1
                           : axis == 1 ? static_cast<std::size_t>(nx)
                                       : static_cast<std::size_t>(nx) * ny;
  const int len = g.dims[axis];
  const int n0 = axis == 0 ? ny : nx;
  const int n1 = axis == 2 ? ny : nz;
  for (int b = 0; b < n1; ++b) {
    for (int a = 0; a < n0; ++a) {
      std::size_t base;
      if (axis == 0) base = g.linear_index(0, a, b);
      else if (axis == 1) base = g.linear_index(a, 0, b);
      else base = g.linear_index(a, b, 0);
      for (int i = 0; i < len; ++i) {
        const std::size_t at = base + static_cast<std::size_t>(i) * stride;
        std::uint8_t v = in[at];
        if (i > 0) v |= in[at - stride];
        if (i + 1 < len) v |= in[at + stride];
        out[at] = v;
      }
    }
  }
}

void pass_axis_and(const std::vector<std::uint8_t>& in, std::vector<std::uint8_t>& out,
                   const GridGeometry& g, int axis) {
  const int nx = g.dims[0], ny = g.dims[1];
  const std::size_t stride = axis == 0 ? 1
                           : axis == 1 ? static_cast<std::size_t>(nx)
                                       : static_cast<std::size_t>(nx) * ny;
  const int len = g.dims[axis];
  const int n0 = axis == 0 ? g.dims[1] : g.dims[0];
  const int n1 = axis == 2 ? g.dims[1] : g.dims[2];
  for (int b = 0; b < n1; ++b) {
    for (int a = 0; a < n0; ++a) {
      std::size_t base;
      if (axis == 0) base = g.linear_index(0, a, b);
      else if (axis == 1) base = g.linear_index(a, 0, b);
      else base = g.linear_index(a, b, 0);
      for (int i = 0; i < len; ++i) {
        const std::size_t at = base + static_cast<std::size_t>(i) * stride;
        // Outside the grid counts as background.
        std::uint8_t v = in[at];
        v &= (i > 0) ? in[at - stride] : std::uint8_t{0};
        v &= (i + 1 < len) ? in[at + stride] : std::uint8_t{0};
        out[at] = v;
      }
    }
  }
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, int iterations) {
  BinaryMask result = mask;
  if (iterations <= 0) return result;
  std::vector<std::uint8_t> tmp(result.bits.size());
  for (int it = 0; it < iterations; ++it) {
    pass_axis_or(result.bits, tmp, mask.geometry, 0);
    pass_axis_or(tmp, result.bits, mask.geometry, 1);
    pass_axis_or(result.bits, tmp, mask.geometry, 2);
    result.bits.swap(tmp);
  }
  return result;
}

BinaryMask erode(const BinaryMask& mask, int iterations) {
  BinaryMask result = mask;
  if (iterations <= 0) return result;
  std::vector<std::uint8_t> tmp(result.bits.size());
  for (int it = 0; it < iterations; ++it) {
    pass_axis_and(result.bits, tmp, mask.geometry, 0);
    pass_axis_and(tmp, result.bits, mask.geometry, 1);
    pass_axis_and(result.bits, tmp, mask.geometry, 2);
    result.bits.swap(tmp);
  }
  return result;
}

}  // namespace lesioneval
