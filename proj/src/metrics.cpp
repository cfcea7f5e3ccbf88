#include "lesioneval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lesioneval/csv.hpp"
#include "lesioneval/errors.hpp"
#include "lesioneval/morphology.hpp"

namespace lesioneval {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Box {
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{-1, -1, -1};  // inclusive; empty when hi < lo

  std::array<int, 3> size() const {
    return {hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
  }
  std::size_t volume() const {
    const auto s = size();
    return static_cast<std::size_t>(s[0]) * s[1] * s[2];
  }
  bool contains(const std::array<int, 3>& c) const {
    return c[0] >= lo[0] && c[0] <= hi[0] && c[1] >= lo[1] && c[1] <= hi[1] && c[2] >= lo[2] &&
           c[2] <= hi[2];
  }
  bool overlaps(const Box& other) const {
    for (int k = 0; k < 3; ++k)
      if (hi[k] < other.lo[k] || other.hi[k] < lo[k]) return false;
    return true;
  }
  std::size_t local_index(const std::array<int, 3>& c) const {
    const auto s = size();
    return static_cast<std::size_t>(c[0] - lo[0]) +
           static_cast<std::size_t>(s[0]) *
               (static_cast<std::size_t>(c[1] - lo[1]) +
                static_cast<std::size_t>(s[1]) * static_cast<std::size_t>(c[2] - lo[2]));
  }
};

Box bounding_box(const std::vector<std::size_t>& voxels, const GridGeometry& g) {
  Box box;
  box.lo = {g.dims[0], g.dims[1], g.dims[2]};
  box.hi = {-1, -1, -1};
  for (std::size_t v : voxels) {
    const auto c = g.coords(v);
    for (int k = 0; k < 3; ++k) {
      box.lo[k] = std::min(box.lo[k], c[k]);
      box.hi[k] = std::max(box.hi[k], c[k]);
    }
  }
  return box;
}

Box pad_box(Box box, int pad, const GridGeometry& g) {
  for (int k = 0; k < 3; ++k) {
    box.lo[k] = std::max(0, box.lo[k] - pad);
    box.hi[k] = std::min(g.dims[k] - 1, box.hi[k] + pad);
  }
  return box;
}

Box union_box(const Box& a, const Box& b) {
  Box u;
  for (int k = 0; k < 3; ++k) {
    u.lo[k] = std::min(a.lo[k], b.lo[k]);
    u.hi[k] = std::max(a.hi[k], b.hi[k]);
  }
  return u;
}

/// Voxels of the sorted index set with at least one 6-neighbor outside the
/// set; grid-boundary voxels count as surface.
std::vector<std::array<int, 3>> surface_voxels(const std::vector<std::size_t>& voxels,
                                               const GridGeometry& g) {
  const Box box = bounding_box(voxels, g);
  std::vector<std::uint8_t> member(box.volume(), 0);
  for (std::size_t v : voxels) member[box.local_index(g.coords(v))] = 1;

  static constexpr int kSix[6][3] = {{-1, 0, 0}, {1, 0, 0},  {0, -1, 0},
                                     {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};
  std::vector<std::array<int, 3>> surface;
  for (std::size_t v : voxels) {
    const auto c = g.coords(v);
    bool is_surface = false;
    for (const auto& o : kSix) {
      const std::array<int, 3> nb{c[0] + o[0], c[1] + o[1], c[2] + o[2]};
      if (!g.in_bounds(nb[0], nb[1], nb[2]) || !box.contains(nb) ||
          member[box.local_index(nb)] == 0) {
        is_surface = true;
        break;
      }
    }
    if (is_surface) surface.push_back(c);
  }
  return surface;
}

/// 1D squared-distance transform (lower envelope of parabolas) with
/// physical spacing s; f may contain +inf for "no seed".
void dt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
           std::vector<double>& z, int n, double s) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (!(f[q] < kInf)) continue;
    const double xq = q * s;
    const double fq = f[q] + xq * xq;
    double sint = 0.0;
    while (k >= 0) {
      const double xp = v[k] * s;
      sint = (fq - (f[v[k]] + xp * xp)) / (2.0 * xq - 2.0 * xp);
      if (sint <= z[k])
        --k;
      else
        break;
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
    } else {
      ++k;
      v[k] = q;
      z[k] = sint;
    }
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill_n(d.begin(), n, kInf);
    return;
  }
  int j = 0;
  for (int i = 0; i < n; ++i) {
    const double xi = i * s;
    while (z[j + 1] < xi) ++j;
    const double dx = xi - v[j] * s;
    d[i] = dx * dx + f[v[j]];
  }
}

/// Exact squared Euclidean distance (in mm) to the nearest seed, computed
/// over `box`; anisotropic spacing handled per axis.
std::vector<double> edt_squared(const std::vector<std::array<int, 3>>& seeds, const Box& box,
                                const std::array<double, 3>& spacing) {
  const auto sz = box.size();
  std::vector<double> field(box.volume(), kInf);
  for (const auto& s : seeds) field[box.local_index(s)] = 0.0;

  const int max_len = std::max({sz[0], sz[1], sz[2]});
  std::vector<double> line(max_len), dist(max_len), z(max_len + 1);
  std::vector<int> v(max_len);

  for (int axis = 0; axis < 3; ++axis) {
    const int len = sz[axis];
    const std::size_t stride = axis == 0 ? 1
                             : axis == 1 ? static_cast<std::size_t>(sz[0])
                                         : static_cast<std::size_t>(sz[0]) * sz[1];
    const int n0 = axis == 0 ? sz[1] : sz[0];
    const int n1 = axis == 2 ? sz[1] : sz[2];
    for (int b = 0; b < n1; ++b) {
      for (int a = 0; a < n0; ++a) {
        std::size_t base;
        if (axis == 0)
          base = static_cast<std::size_t>(sz[0]) * (a + static_cast<std::size_t>(sz[1]) * b);
        else if (axis == 1)
          base = a + static_cast<std::size_t>(sz[0]) * (static_cast<std::size_t>(sz[1]) * b);
        else
          base = a + static_cast<std::size_t>(sz[0]) * b;
        for (int i = 0; i < len; ++i) line[i] = field[base + i * stride];
        dt_1d(line, dist, v, z, len, spacing[axis]);
        for (int i = 0; i < len; ++i) field[base + i * stride] = dist[i];
      }
    }
  }
  return field;
}

/// Nearest-rank percentile with the ceiling convention: the k-th smallest
/// where k = ceil(p * m), clamped to [1, m].
double nearest_rank(std::vector<double>& values, double percentile) {
  std::sort(values.begin(), values.end());
  const double m = static_cast<double>(values.size());
  long long k = static_cast<long long>(std::ceil(percentile * m - 1e-9));
  k = std::max<long long>(1, std::min<long long>(k, values.size()));
  return values[static_cast<std::size_t>(k - 1)];
}

double dice_counts(std::size_t na, std::size_t nb, std::size_t inter) {
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

long long parse_ll(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const long long value = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return value;
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "' needs an integer, got '" + text + "'");
  }
}

/// Count of post-cutoff components; used for the penalty-branch tallies.
int count_components_after_cutoff(const BinaryMask& mask, const EvalConfig& cfg) {
  int kept = 0;
  for (const auto& comp : connected_components(mask, cfg.connectivity))
    if (static_cast<long long>(comp.voxel_count()) >= cfg.min_lesion_voxels) ++kept;
  return kept;
}

}  // namespace

void EvalConfig::validate() const {
  if (dilation_iterations < 0) throw UsageError("dilation_iterations must be >= 0");
  if (connectivity != 6 && connectivity != 26)
    throw UsageError("connectivity must be 6 or 26, got " + std::to_string(connectivity));
  if (min_lesion_voxels < 0) throw UsageError("min_lesion_voxels must be >= 0");
  if (!(missing_region_hd95_mm >= 0) || !std::isfinite(missing_region_hd95_mm))
    throw UsageError("missing_region_hd95_mm must be a nonnegative number");
  if (!(unmatched_lesion_hd95_mm >= 0) || !std::isfinite(unmatched_lesion_hd95_mm))
    throw UsageError("unmatched_lesion_hd95_mm must be a nonnegative number");
  if (!(hd_percentile >= 0.0 && hd_percentile <= 1.0))
    throw UsageError("hd_percentile must lie in [0,1]");
}

EvalConfig load_eval_config(const std::filesystem::path& path) {
  EvalConfig cfg;
  for (const std::string& raw : read_lines(path)) {
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line '" + line + "' is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "dilation_iterations") {
      cfg.dilation_iterations = static_cast<int>(parse_ll(value, key));
    } else if (key == "connectivity") {
      cfg.connectivity = static_cast<int>(parse_ll(value, key));
    } else if (key == "min_lesion_voxels") {
      cfg.min_lesion_voxels = parse_ll(value, key);
    } else if (key == "missing_region_hd95_mm") {
      cfg.missing_region_hd95_mm = parse_double(value, key);
    } else if (key == "unmatched_lesion_hd95_mm") {
      cfg.unmatched_lesion_hd95_mm = parse_double(value, key);
    } else if (key == "hd_percentile") {
      cfg.hd_percentile = parse_double(value, key);
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

void save_eval_config(const EvalConfig& cfg, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "dilation_iterations = " << cfg.dilation_iterations << '\n'
      << "connectivity = " << cfg.connectivity << '\n'
      << "min_lesion_voxels = " << cfg.min_lesion_voxels << '\n'
      << "missing_region_hd95_mm = " << format_g17(cfg.missing_region_hd95_mm) << '\n'
      << "unmatched_lesion_hd95_mm = " << format_g17(cfg.unmatched_lesion_hd95_mm) << '\n'
      << "hd_percentile = " << format_g17(cfg.hd_percentile) << '\n';
  write_text_file(path, out.str());
}

double dice(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::size_t inter = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else {
      ++inter;
      ++i;
      ++j;
    }
  }
  return dice_counts(a.size(), b.size(), inter);
}

double hd95(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
            const GridGeometry& geom, double percentile) {
  if (a.empty() || b.empty())
    throw ContractError("hd95 needs two nonempty voxel sets; empty cases are penalty-scored");

  const std::vector<std::array<int, 3>> surf_a = surface_voxels(a, geom);
  const std::vector<std::array<int, 3>> surf_b = surface_voxels(b, geom);
  const Box box = union_box(bounding_box(a, geom), bounding_box(b, geom));

  std::vector<double> directed_ab;
  directed_ab.reserve(surf_a.size());
  {
    const std::vector<double> to_b = edt_squared(surf_b, box, geom.spacing);
    for (const auto& p : surf_a) directed_ab.push_back(std::sqrt(to_b[box.local_index(p)]));
  }
  std::vector<double> directed_ba;
  directed_ba.reserve(surf_b.size());
  {
    const std::vector<double> to_a = edt_squared(surf_a, box, geom.spacing);
    for (const auto& p : surf_b) directed_ba.push_back(std::sqrt(to_a[box.local_index(p)]));
  }
  return std::max(nearest_rank(directed_ab, percentile), nearest_rank(directed_ba, percentile));
}

LesionDecomposition decompose_lesions(const BinaryMask& gt, const BinaryMask& pred,
                                      const EvalConfig& cfg) {
  cfg.validate();
  if (!geometry_compatible(gt.geometry, pred.geometry))
    throw GeometryMismatchError("geometry mismatch: gt " + describe_geometry(gt.geometry) +
                                " vs pred " + describe_geometry(pred.geometry));
  const GridGeometry& geom = gt.geometry;

  LesionDecomposition out;
  auto keep_large = [&](std::vector<LesionComponent> comps) {
    std::vector<LesionComponent> kept;
    for (auto& c : comps) {
      if (static_cast<long long>(c.voxel_count()) >= cfg.min_lesion_voxels) {
        c.id = static_cast<int>(kept.size()) + 1;
        kept.push_back(std::move(c));
      }
    }
    return kept;
  };
  out.gt_lesions = keep_large(connected_components(gt, cfg.connectivity));
  out.pred_components = keep_large(connected_components(pred, cfg.connectivity));

  // Each lesion's catchment: the lesion dilated in isolation, evaluated on
  // a padded crop (the dilation cannot reach past bbox + iterations).
  struct Catchment {
    Box box;
    std::vector<std::uint8_t> bits;
  };
  std::vector<Catchment> catchments;
  catchments.reserve(out.gt_lesions.size());
  for (const auto& lesion : out.gt_lesions) {
    Catchment c;
    c.box = pad_box(bounding_box(lesion.voxel_indices, geom), cfg.dilation_iterations, geom);
    const auto sz = c.box.size();
    BinaryMask crop;
    crop.geometry = GridGeometry{{sz[0], sz[1], sz[2]}, geom.spacing};
    crop.bits.assign(c.box.volume(), 0);
    for (std::size_t v : lesion.voxel_indices) crop.bits[c.box.local_index(geom.coords(v))] = 1;
    c.bits = dilate(crop, cfg.dilation_iterations).bits;
    catchments.push_back(std::move(c));
  }

  std::vector<std::vector<int>> assigned(out.gt_lesions.size());
  std::vector<bool> pred_hit(out.pred_components.size(), false);
  for (std::size_t j = 0; j < out.pred_components.size(); ++j) {
    const auto& comp = out.pred_components[j];
    const Box comp_box = bounding_box(comp.voxel_indices, geom);
    for (std::size_t i = 0; i < catchments.size(); ++i) {
      if (!comp_box.overlaps(catchments[i].box)) continue;
      for (std::size_t v : comp.voxel_indices) {
        const auto c = geom.coords(v);
        if (catchments[i].box.contains(c) && catchments[i].bits[catchments[i].box.local_index(c)]) {
          assigned[i].push_back(static_cast<int>(j));
          pred_hit[j] = true;
          break;
        }
      }
    }
  }

  for (std::size_t i = 0; i < out.gt_lesions.size(); ++i) {
    LesionMatch match;
    match.gt_lesion_id = out.gt_lesions[i].id;
    if (assigned[i].empty()) {
      match.dice = 0.0;
      match.hd95_mm = cfg.unmatched_lesion_hd95_mm;
    } else {
      std::vector<std::size_t> pred_union;
      for (int j : assigned[i]) {
        match.pred_component_ids.push_back(out.pred_components[j].id);
        const auto& vs = out.pred_components[j].voxel_indices;
        pred_union.insert(pred_union.end(), vs.begin(), vs.end());
      }
      std::sort(pred_union.begin(), pred_union.end());
      pred_union.erase(std::unique(pred_union.begin(), pred_union.end()), pred_union.end());
      match.dice = dice(out.gt_lesions[i].voxel_indices, pred_union);
      match.hd95_mm = hd95(out.gt_lesions[i].voxel_indices, pred_union, geom, cfg.hd_percentile);
      ++out.tp;
    }
    out.matches.push_back(std::move(match));
  }
  out.fn = static_cast<int>(out.gt_lesions.size()) - out.tp;
  for (bool hit : pred_hit)
    if (!hit) ++out.fp;
  return out;
}

double lesionwise_dice(const LesionDecomposition& d) {
  const int denom = d.tp + d.fn + d.fp;
  if (denom == 0) return 1.0;
  double sum = 0.0;
  for (const auto& m : d.matches)
    if (!m.pred_component_ids.empty()) sum += m.dice;
  return sum / static_cast<double>(denom);
}

double lesionwise_hd95(const LesionDecomposition& d, const EvalConfig& cfg) {
  const int denom = d.tp + d.fn + d.fp;
  if (denom == 0) return 0.0;
  double sum = 0.0;
  for (const auto& m : d.matches)
    if (!m.pred_component_ids.empty()) sum += m.hd95_mm;
  sum += cfg.unmatched_lesion_hd95_mm * static_cast<double>(d.fn + d.fp);
  return sum / static_cast<double>(denom);
}

double sensitivity(const BinaryMask& gt, const BinaryMask& pred) {
  if (!geometry_compatible(gt.geometry, pred.geometry))
    throw GeometryMismatchError("geometry mismatch: gt " + describe_geometry(gt.geometry) +
                                " vs pred " + describe_geometry(pred.geometry));
  std::size_t gt_count = 0, inter = 0;
  for (std::size_t i = 0; i < gt.bits.size(); ++i) {
    if (gt.bits[i]) {
      ++gt_count;
      inter += pred.bits[i] != 0;
    }
  }
  if (gt_count == 0) return 1.0;  // no positives to find
  return static_cast<double>(inter) / static_cast<double>(gt_count);
}

CaseMetrics evaluate_case(const LabelVolume& gt, const LabelVolume& pred, const EvalConfig& cfg) {
  cfg.validate();
  if (!geometry_compatible(gt.geometry(), pred.geometry()))
    throw GeometryMismatchError("geometry mismatch: gt " + describe_geometry(gt.geometry()) +
                                " vs pred " + describe_geometry(pred.geometry()));

  CaseMetrics result;
  for (RegionKind region : kAllRegions) {
    const BinaryMask gm = compose_region(gt, region);
    const BinaryMask pm = compose_region(pred, region);

    std::size_t gt_count = 0, pred_count = 0, inter = 0;
    for (std::size_t i = 0; i < gm.bits.size(); ++i) {
      gt_count += gm.bits[i] != 0;
      pred_count += pm.bits[i] != 0;
      inter += (gm.bits[i] & pm.bits[i]) != 0;
    }

    RegionMetrics& m = result[region];
    m.gt_empty = gt_count == 0;
    m.pred_empty = pred_count == 0;
    m.volumewise_dice = dice_counts(gt_count, pred_count, inter);
    m.sensitivity = m.gt_empty ? 1.0 : static_cast<double>(inter) / static_cast<double>(gt_count);

    // Whole-mask penalty table first; lesion decomposition only when both
    // sides are nonempty.
    if (m.gt_empty && m.pred_empty) {
      m.lesionwise_dice = 1.0;
      m.lesionwise_hd95_mm = 0.0;
    } else if (m.gt_empty || m.pred_empty) {
      m.lesionwise_dice = 0.0;
      m.lesionwise_hd95_mm = cfg.missing_region_hd95_mm;
      if (m.pred_empty)
        m.fn = count_components_after_cutoff(gm, cfg);
      else
        m.fp = count_components_after_cutoff(pm, cfg);
    } else {
      const LesionDecomposition d = decompose_lesions(gm, pm, cfg);
      m.lesionwise_dice = lesionwise_dice(d);
      m.lesionwise_hd95_mm = lesionwise_hd95(d, cfg);
      m.tp = d.tp;
      m.fn = d.fn;
      m.fp = d.fp;
    }
  }
  return result;
}

}  // namespace lesioneval
