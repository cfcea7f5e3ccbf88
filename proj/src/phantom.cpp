#include "lesioneval/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lesioneval/csv.hpp"
#include "lesioneval/errors.hpp"
#include "lesioneval/morphology.hpp"
#include "lesioneval/rng.hpp"

namespace lesioneval {
namespace {

constexpr int kPlacementAttempts = 200;
// Chebyshev gap between blobs: 2 keeps every blob its own 26-connected
// component even across labels.
constexpr int kBlobGap = 2;
// A box gap of g puts blob voxels at Chebyshev distance >= g+1, so 5 keeps
// false blobs beyond the default 3-pass catchment reach.
constexpr int kFalseBlobGap = 5;

struct BlobBox {
  std::array<int, 3> lo, hi;  // inclusive
};

bool boxes_closer_than(const BlobBox& a, const BlobBox& b, int gap) {
  for (int k = 0; k < 3; ++k)
    if (a.hi[k] + gap < b.lo[k] || b.hi[k] + gap < a.lo[k]) return false;
  return true;
}

void fill_ellipsoid(std::vector<std::uint8_t>& voxels, const GridGeometry& g,
                    const std::array<int, 3>& center, const std::array<int, 3>& radii,
                    std::uint8_t label) {
  for (int z = center[2] - radii[2]; z <= center[2] + radii[2]; ++z) {
    for (int y = center[1] - radii[1]; y <= center[1] + radii[1]; ++y) {
      for (int x = center[0] - radii[0]; x <= center[0] + radii[0]; ++x) {
        const double fx = static_cast<double>(x - center[0]) / radii[0];
        const double fy = static_cast<double>(y - center[1]) / radii[1];
        const double fz = static_cast<double>(z - center[2]) / radii[2];
        if (fx * fx + fy * fy + fz * fz <= 1.0) voxels[g.linear_index(x, y, z)] = label;
      }
    }
  }
}

/// Places one ellipsoid at least `gap` voxels (Chebyshev) away from every
/// accepted box. Throws GenerationError after bounded retries.
BlobBox place_blob(std::vector<std::uint8_t>& voxels, const GridGeometry& g,
                   std::vector<BlobBox>& placed, std::mt19937_64& rng, int radius_min,
                   int radius_max, int gap, std::uint8_t label, const char* what) {
  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    std::array<int, 3> radii, center;
    bool fits = true;
    for (int k = 0; k < 3; ++k) {
      radii[k] = uniform_int(rng, radius_min, radius_max);
      if (g.dims[k] - 1 - radii[k] < radii[k]) {
        fits = false;
        break;
      }
      center[k] = uniform_int(rng, radii[k], g.dims[k] - 1 - radii[k]);
    }
    if (!fits) continue;
    const BlobBox box{{center[0] - radii[0], center[1] - radii[1], center[2] - radii[2]},
                      {center[0] + radii[0], center[1] + radii[1], center[2] + radii[2]}};
    bool clear = true;
    for (const BlobBox& other : placed) {
      if (boxes_closer_than(box, other, gap)) {
        clear = false;
        break;
      }
    }
    if (!clear) continue;
    fill_ellipsoid(voxels, g, center, radii, label);
    placed.push_back(box);
    return box;
  }
  throw GenerationError(std::string("could not place ") + what + " after " +
                        std::to_string(kPlacementAttempts) + " attempts; grid too crowded");
}

std::vector<std::uint8_t> apply_perturbation(const std::vector<std::uint8_t>& gt,
                                             const GridGeometry& g, const Perturbation& p,
                                             std::vector<BlobBox>& placed,
                                             std::mt19937_64& rng) {
  const std::size_t n = gt.size();
  switch (p.kind) {
    case PerturbationKind::none:
      return gt;
    case PerturbationKind::erode:
    case PerturbationKind::dilate: {
      std::vector<std::uint8_t> pred(n, 0);
      for (std::uint8_t label = 1; label <= kMaxLabel; ++label) {
        BinaryMask mask;
        mask.geometry = g;
        mask.bits.resize(n);
        for (std::size_t i = 0; i < n; ++i) mask.bits[i] = gt[i] == label;
        const BinaryMask morphed =
            p.kind == PerturbationKind::erode ? erode(mask, 1) : dilate(mask, 1);
        for (std::size_t i = 0; i < n; ++i)
          if (morphed.bits[i]) pred[i] = label;  // later labels win overlaps
      }
      return pred;
    }
    case PerturbationKind::shift: {
      std::vector<std::uint8_t> pred(n, 0);
      for (int z = 0; z < g.dims[2]; ++z)
        for (int y = 0; y < g.dims[1]; ++y)
          for (int x = 0; x < g.dims[0]; ++x) {
            const int sx = x + p.shift[0], sy = y + p.shift[1], sz = z + p.shift[2];
            if (g.in_bounds(sx, sy, sz))
              pred[g.linear_index(sx, sy, sz)] = gt[g.linear_index(x, y, z)];
          }
      return pred;
    }
    case PerturbationKind::drop_region: {
      std::vector<std::uint8_t> pred = gt;
      for (std::size_t i = 0; i < n; ++i)
        if (region_contains_label(p.region, pred[i])) pred[i] = 0;
      return pred;
    }
    case PerturbationKind::add_false_blob: {
      std::vector<std::uint8_t> pred = gt;
      for (int c = 0; c < p.blob_count; ++c)
        place_blob(pred, g, placed, rng, p.blob_radius, p.blob_radius, kFalseBlobGap,
                   kLabelEnhancing, "false blob");
      return pred;
    }
  }
  throw ContractError("unhandled perturbation kind");
}

}  // namespace

std::string Perturbation::to_string() const {
  switch (kind) {
    case PerturbationKind::none: return "none";
    case PerturbationKind::erode: return "erode";
    case PerturbationKind::dilate: return "dilate";
    case PerturbationKind::shift: {
      std::ostringstream out;
      out << "shift:" << shift[0] << ',' << shift[1] << ',' << shift[2];
      return out.str();
    }
    case PerturbationKind::drop_region:
      return std::string("drop:") + region_name(region);
    case PerturbationKind::add_false_blob: {
      std::ostringstream out;
      out << "falseblob:" << blob_count << ',' << blob_radius;
      return out.str();
    }
  }
  return "?";
}

Perturbation parse_perturbation(std::string_view text) {
  Perturbation p;
  if (text == "none") return p;
  if (text == "erode") {
    p.kind = PerturbationKind::erode;
    return p;
  }
  if (text == "dilate") {
    p.kind = PerturbationKind::dilate;
    return p;
  }
  const std::size_t colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view args = colon == std::string_view::npos ? "" : text.substr(colon + 1);
  if (head == "shift") {
    int dx, dy, dz;
    if (std::sscanf(std::string(args).c_str(), "%d,%d,%d", &dx, &dy, &dz) != 3)
      throw UsageError("shift perturbation needs 'shift:dx,dy,dz'");
    p.kind = PerturbationKind::shift;
    p.shift = {dx, dy, dz};
    return p;
  }
  if (head == "drop") {
    p.kind = PerturbationKind::drop_region;
    p.region = parse_region(args);
    return p;
  }
  if (head == "falseblob") {
    int count, radius;
    if (std::sscanf(std::string(args).c_str(), "%d,%d", &count, &radius) != 2)
      throw UsageError("falseblob perturbation needs 'falseblob:count,radius'");
    p.kind = PerturbationKind::add_false_blob;
    p.blob_count = count;
    p.blob_radius = radius;
    return p;
  }
  throw UsageError("unknown perturbation '" + std::string(text) + "'");
}

void PhantomSpec::validate() const {
  GridGeometry g{dims, spacing};
  validate_geometry(g);
  if (n_lesions < 0) throw UsageError("n_lesions must be >= 0");
  if (radius_min < 1) throw UsageError("lesion radii must be >= 1");
  if (radius_max < radius_min) throw UsageError("radius_max must be >= radius_min");
  if (perturbation.kind == PerturbationKind::shift) {
    for (int k = 0; k < 3; ++k)
      if (std::abs(perturbation.shift[k]) >= dims[k])
        throw UsageError("shift magnitude must be smaller than the grid");
  }
  if (perturbation.kind == PerturbationKind::add_false_blob) {
    if (perturbation.blob_count < 1) throw UsageError("falseblob count must be >= 1");
    if (perturbation.blob_radius < 1) throw UsageError("falseblob radius must be >= 1");
  }
}

std::string PhantomSpec::canonical_string() const {
  std::ostringstream out;
  out << "seed=" << seed << ";dims=" << dims[0] << ',' << dims[1] << ',' << dims[2]
      << ";spacing=" << format_g17(spacing[0]) << ',' << format_g17(spacing[1]) << ','
      << format_g17(spacing[2]) << ";lesions=" << n_lesions << ";radius=" << radius_min << ','
      << radius_max << ";perturb=" << perturbation.to_string();
  return out.str();
}

PhantomPair generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  const GridGeometry g{spec.dims, spec.spacing};
  std::mt19937_64 rng(spec.seed);

  std::vector<std::uint8_t> gt(g.voxel_count(), 0);
  std::vector<BlobBox> placed;
  for (std::uint8_t label = 1; label <= kMaxLabel; ++label) {
    for (int i = 0; i < spec.n_lesions; ++i) {
      const std::string what = std::string("lesion for label ") + std::to_string(label);
      place_blob(gt, g, placed, rng, spec.radius_min, spec.radius_max, kBlobGap, label,
                 what.c_str());
    }
  }

  std::vector<std::uint8_t> pred = apply_perturbation(gt, g, spec.perturbation, placed, rng);
  return PhantomPair{LabelVolume(g, std::move(gt)), LabelVolume(g, std::move(pred))};
}

std::string phantom_digest(const PhantomSpec& spec) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(spec.canonical_string())));
  return buf;
}

}  // namespace lesioneval
