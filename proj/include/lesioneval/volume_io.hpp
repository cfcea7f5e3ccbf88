#ifndef LESIONEVAL_VOLUME_IO_HPP
#define LESIONEVAL_VOLUME_IO_HPP

#include <filesystem>

#include "lesioneval/label_volume.hpp"

namespace lesioneval {

/// Reads a label volume from disk. The container is chosen by extension:
/// ".rawvol" is the text debug format, ".nii.gz" (or any ".gz") is a
/// gzip-compressed NIfTI-1 single file, anything else is plain NIfTI-1.
///
/// Accepted NIfTI-1 datatypes: uint8, int16, uint16, int32, float32,
/// float64. Either byte order is handled. scl_slope/scl_inter scaling is
/// applied when slope is neither 0 nor 1; values must be integral within
/// 1e-6 and land in {0,1,2,3} after coercion. Orientation (qform/sform) is
/// ignored; only pixdim spacing is kept.
LabelVolume read_label_volume(const std::filesystem::path& path);

/// Writes a label volume. ".rawvol" emits the text debug format; other
/// extensions emit NIfTI-1 uint8, gzip-compressed iff the name ends ".gz".
/// read_label_volume(write_label_volume(v)) reproduces v exactly (note that
/// NIfTI stores spacing as float32, so spacing must be float-representable
/// to round-trip bit-exactly; the text format keeps full double precision).
void write_label_volume(const LabelVolume& vol, const std::filesystem::path& path);

/// Returns the shared grid when dims match exactly and spacing matches
/// within kSpacingToleranceMm per axis; throws GeometryMismatchError
/// listing both geometries otherwise. The returned spacing is gt's.
GridGeometry validate_pair(const LabelVolume& gt, const LabelVolume& pred);

}  // namespace lesioneval

#endif
