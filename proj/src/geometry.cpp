#include "lesioneval/geometry.hpp"

#include <cmath>
#include <sstream>

#include "lesioneval/errors.hpp"

namespace lesioneval {

bool geometry_compatible(const GridGeometry& a, const GridGeometry& b) {
  if (a.dims != b.dims) return false;
  for (int k = 0; k < 3; ++k) {
    if (std::fabs(a.spacing[k] - b.spacing[k]) > kSpacingToleranceMm) return false;
  }
  return true;
}

std::string describe_geometry(const GridGeometry& g) {
  std::ostringstream out;
  out << "dims (" << g.dims[0] << "," << g.dims[1] << "," << g.dims[2] << ") spacing ("
      << g.spacing[0] << "," << g.spacing[1] << "," << g.spacing[2] << ") mm";
  return out.str();
}

void validate_geometry(const GridGeometry& g) {
  for (int k = 0; k < 3; ++k) {
    if (g.dims[k] < 1) throw UsageError("grid dims must be >= 1, got " + describe_geometry(g));
    if (!(g.spacing[k] > 0.0) || !std::isfinite(g.spacing[k]))
      throw UsageError("grid spacing must be positive, got " + describe_geometry(g));
  }
}

}  // namespace lesioneval
