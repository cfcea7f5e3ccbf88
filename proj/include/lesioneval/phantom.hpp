#ifndef LESIONEVAL_PHANTOM_HPP
#define LESIONEVAL_PHANTOM_HPP

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "lesioneval/label_volume.hpp"
#include "lesioneval/regions.hpp"

namespace lesioneval {

enum class PerturbationKind { none, erode, dilate, shift, drop_region, add_false_blob };

/// How the prediction volume is derived from the ground truth.
struct Perturbation {
  PerturbationKind kind = PerturbationKind::none;
  std::array<int, 3> shift{0, 0, 0};           // shift
  RegionKind region = RegionKind::ET;          // drop_region
  int blob_count = 0;                          // add_false_blob
  int blob_radius = 0;                         // add_false_blob

  std::string to_string() const;
};

/// Parses "none", "erode", "dilate", "shift:dx,dy,dz", "drop:ET|TC|WT",
/// "falseblob:count,radius". Throws UsageError on anything else.
Perturbation parse_perturbation(std::string_view text);

/// Deterministic synthetic case: n_lesions axis-aligned ellipsoids per
/// label, radii drawn from [radius_min, radius_max], pairwise separated so
/// each blob is its own 26-connected component.
struct PhantomSpec {
  std::uint64_t seed = 0;
  std::array<int, 3> dims{32, 32, 32};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  int n_lesions = 1;
  int radius_min = 2;
  int radius_max = 4;
  Perturbation perturbation{};

  void validate() const;  // throws UsageError
  /// Canonical flag-style rendering; input to the digest.
  std::string canonical_string() const;
};

struct PhantomPair {
  LabelVolume gt;
  LabelVolume pred;
};

/// Pure function of the spec: byte-identical volumes across runs and
/// platforms. Throws GenerationError when a blob cannot be placed within
/// bounded retries.
PhantomPair generate_phantom(const PhantomSpec& spec);

/// Stable 16-hex-digit digest of the canonical spec string.
std::string phantom_digest(const PhantomSpec& spec);

}  // namespace lesioneval

#endif
