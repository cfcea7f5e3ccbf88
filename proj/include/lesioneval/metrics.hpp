#ifndef LESIONEVAL_METRICS_HPP
#define LESIONEVAL_METRICS_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lesioneval/components.hpp"
#include "lesioneval/label_volume.hpp"
#include "lesioneval/regions.hpp"

namespace lesioneval {

/// Knobs for lesion isolation and scoring. Defaults reproduce the
/// benchmark settings: 3 dilation passes of the 3x3x3 element, 26-connected
/// components, 50-voxel cutoff, 374 mm penalties (the corner-to-corner
/// distance of the 240x240x155 1 mm atlas grid), 95th percentile.
struct EvalConfig {
  int dilation_iterations = 3;
  int connectivity = 26;
  long long min_lesion_voxels = 50;
  double missing_region_hd95_mm = 374.0;
  double unmatched_lesion_hd95_mm = 374.0;
  double hd_percentile = 0.95;

  /// Throws UsageError if any field is out of range.
  void validate() const;
};

/// Flat "key = value" text file; missing keys keep their defaults, so an
/// absent file reproduces the benchmark settings. Unknown keys are errors.
EvalConfig load_eval_config(const std::filesystem::path& path);
void save_eval_config(const EvalConfig& cfg, const std::filesystem::path& path);

/// 2|a^b| / (|a|+|b|) over sorted index sets; 1 when both are empty.
double dice(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

/// Symmetric percentile Hausdorff distance in mm between two nonempty voxel
/// index sets: the max of the two directed distances, where each directed
/// distance is the nearest-rank (ceiling) percentile of surface-to-surface
/// Euclidean distances. A surface voxel is a set voxel with at least one
/// 6-neighbor outside the set; grid-boundary voxels count as surface.
/// Throws ContractError when either set is empty.
double hd95(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
            const GridGeometry& geom, double percentile = 0.95);

/// One ground-truth lesion together with the prediction components assigned
/// to it via dilated-footprint overlap. FN lesions carry an empty
/// pred_component_ids, dice 0 and the unmatched HD95 penalty.
struct LesionMatch {
  int gt_lesion_id = 0;
  std::vector<int> pred_component_ids;
  double dice = 0.0;
  double hd95_mm = 0.0;
};

/// Matched/unmatched lesion structure for one region of one case.
/// tp + fn == gt_lesions.size(); fp counts prediction components that
/// intersect no dilated ground-truth lesion.
struct LesionDecomposition {
  std::vector<LesionComponent> gt_lesions;       // post-cutoff, ids 1..L
  std::vector<LesionComponent> pred_components;  // post-cutoff, ids 1..P
  std::vector<LesionMatch> matches;              // one entry per gt lesion
  int tp = 0;
  int fn = 0;
  int fp = 0;
};

/// Lesion isolation and matching:
///  1. ground-truth components on the undilated mask, cutoff applied;
///  2. each surviving lesion's catchment is its own dilation by
///     cfg.dilation_iterations;
///  3. prediction components, cutoff applied symmetrically;
///  4. a prediction component is assigned to every lesion whose catchment
///     it intersects (shared components count for each lesion);
///  5. per-lesion Dice/HD95 between the undilated lesion voxels and the
///     union of its assigned prediction components.
LesionDecomposition decompose_lesions(const BinaryMask& gt, const BinaryMask& pred,
                                      const EvalConfig& cfg);

/// (sum of matched per-lesion Dice) / (tp + fn + fp); 1 when the
/// denominator is 0 (both sides empty after the cutoff).
double lesionwise_dice(const LesionDecomposition& d);

/// (sum of matched per-lesion HD95 + penalty * (fn + fp)) / (tp + fn + fp);
/// 0 when the denominator is 0.
double lesionwise_hd95(const LesionDecomposition& d, const EvalConfig& cfg);

/// Voxel-wise |gt^pred| / |gt|; 1 when gt is empty (no positives to find).
double sensitivity(const BinaryMask& gt, const BinaryMask& pred);

/// Scores for one region of one subject.
struct RegionMetrics {
  double lesionwise_dice = 0.0;
  double lesionwise_hd95_mm = 0.0;
  double volumewise_dice = 0.0;
  double sensitivity = 0.0;
  int tp = 0;
  int fn = 0;
  int fp = 0;
  bool gt_empty = false;
  bool pred_empty = false;
};

struct CaseMetrics {
  std::array<RegionMetrics, 3> regions{};  // indexed by RegionKind

  RegionMetrics& operator[](RegionKind r) { return regions[static_cast<int>(r)]; }
  const RegionMetrics& operator[](RegionKind r) const { return regions[static_cast<int>(r)]; }
};

/// Full per-case evaluation. For each region the whole-mask penalty table
/// applies first:
///   gt empty, pred empty        -> Dice 1, HD95 0
///   exactly one side empty      -> Dice 0, HD95 cfg.missing_region_hd95_mm
/// otherwise lesion decomposition and the lesion-wise aggregates run.
/// Volume-wise Dice and sensitivity are always computed on the full masks.
CaseMetrics evaluate_case(const LabelVolume& gt, const LabelVolume& pred, const EvalConfig& cfg);

}  // namespace lesioneval

#endif
