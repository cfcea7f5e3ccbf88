#include <cmath>

#include "doctest.h"
#include "lesioneval/errors.hpp"
#include "lesioneval/metrics.hpp"
#include "lesioneval/phantom.hpp"
#include "support/helpers.hpp"
#include "support/oracle.hpp"

using namespace lesioneval;
using testutil::cube_indices;
using testutil::iso_grid;
using testutil::make_mask;

namespace {

LabelVolume volume_with_label(const GridGeometry& g, const std::vector<std::size_t>& voxels,
                              std::uint8_t label) {
  std::vector<std::uint8_t> labels(g.voxel_count(), 0);
  for (std::size_t v : voxels) labels[v] = label;
  return LabelVolume(g, std::move(labels));
}

std::vector<std::size_t> set_of(const BinaryMask& mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.bits.size(); ++i)
    if (mask.bits[i]) out.push_back(i);
  return out;
}

}  // namespace

TEST_CASE("dice: identity, disjoint, half overlap, empty-empty") {
  const std::vector<std::size_t> a{1, 2, 3, 4};
  CHECK(dice(a, a) == 1.0);
  CHECK(dice(a, {9, 10, 11, 12}) == 0.0);
  CHECK(dice(a, {3, 4, 7, 8}) == 0.5);  // 2*2/(4+4)
  CHECK(dice({}, {}) == 1.0);
  CHECK(dice(a, {}) == 0.0);
}

TEST_CASE("dice is symmetric on random sets") {
  const GridGeometry g = iso_grid(10);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto a = set_of(testutil::random_mask(g, seed * 2, 0.2));
    const auto b = set_of(testutil::random_mask(g, seed * 2 + 1, 0.2));
    CHECK(dice(a, b) == dice(b, a));
  }
}

TEST_CASE("hd95: identical sets are at distance zero") {
  const GridGeometry g = iso_grid(10);
  const auto blob = cube_indices(g, {2, 2, 2}, {5, 5, 5});
  CHECK(hd95(blob, blob, g, 0.95) == 0.0);
}

TEST_CASE("hd95 of two single voxels five apart along x is 5 mm") {
  const GridGeometry g = iso_grid(10);
  CHECK(hd95({g.linear_index(1, 5, 5)}, {g.linear_index(6, 5, 5)}, g, 0.95) == 5.0);
}

TEST_CASE("hd95 respects anisotropic spacing") {
  GridGeometry g{{10, 10, 10}, {1.0, 1.0, 2.5}};
  CHECK(hd95({g.linear_index(2, 2, 2)}, {g.linear_index(2, 2, 4)}, g, 0.95) == 5.0);
}

TEST_CASE("hd95 on empty input is a contract violation") {
  const GridGeometry g = iso_grid(4);
  CHECK_THROWS_AS(hd95({}, {0}, g, 0.95), ContractError);
  CHECK_THROWS_AS(hd95({0}, {}, g, 0.95), ContractError);
}

TEST_CASE("hd95 matches the all-pairs oracle on random blob pairs") {
  const GridGeometry g = iso_grid(20);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    std::mt19937_64 rng(7000 + seed);
    auto random_cube = [&]() {
      std::array<int, 3> lo, hi;
      for (int k = 0; k < 3; ++k) {
        lo[k] = static_cast<int>(rng() % 12);
        hi[k] = lo[k] + 2 + static_cast<int>(rng() % 6);
      }
      return cube_indices(g, lo, hi);
    };
    const auto a = random_cube();
    const auto b = random_cube();
    for (double percentile : {0.5, 0.95, 1.0}) {
      const double ours = hd95(a, b, g, percentile);
      const double reference = oracle::hd95(a, b, g, percentile);
      CHECK(std::fabs(ours - reference) <= 1e-9);
    }
    CHECK(hd95(a, b, g, 0.95) == hd95(b, a, g, 0.95));
  }
}

TEST_CASE("decomposition of a perfectly predicted 5-cube") {
  const GridGeometry g = iso_grid(16);
  const BinaryMask blob = make_mask(g, cube_indices(g, {4, 4, 4}, {8, 8, 8}));  // 125 voxels
  const LesionDecomposition d = decompose_lesions(blob, blob, EvalConfig{});
  CHECK(d.tp == 1);
  CHECK(d.fn == 0);
  CHECK(d.fp == 0);
  REQUIRE(d.matches.size() == 1);
  CHECK(d.matches[0].dice == 1.0);
  CHECK(d.matches[0].hd95_mm == 0.0);
  CHECK(lesionwise_dice(d) == 1.0);
  CHECK(lesionwise_hd95(d, EvalConfig{}) == 0.0);
}

TEST_CASE("a far prediction component beyond the catchment is a false positive") {
  // gt: 5-cube at the origin corner; pred: same cube plus a 4-cube whose
  // nearest face is 14 voxels away, far beyond the 3-voxel catchment.
  const GridGeometry g = iso_grid(32);
  const auto gt_blob = cube_indices(g, {2, 2, 2}, {6, 6, 6});         // 125
  auto pred_voxels = gt_blob;
  const auto far_blob = cube_indices(g, {20, 20, 20}, {23, 23, 23});  // 64
  pred_voxels.insert(pred_voxels.end(), far_blob.begin(), far_blob.end());
  std::sort(pred_voxels.begin(), pred_voxels.end());

  const LesionDecomposition d =
      decompose_lesions(make_mask(g, gt_blob), make_mask(g, pred_voxels), EvalConfig{});
  CHECK(d.tp == 1);
  CHECK(d.fn == 0);
  CHECK(d.fp == 1);
  // hand-evaluated aggregates: (1.0)/(1+0+1) and (0 + 374)/(1+0+1)
  CHECK(lesionwise_dice(d) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lesionwise_hd95(d, EvalConfig{}) == doctest::Approx(187.0).epsilon(1e-12));
}

TEST_CASE("a nearby prediction component inside the catchment merges into the match") {
  // pred blob 2 voxels off the gt face: inside the 3-voxel catchment.
  const GridGeometry g = iso_grid(24);
  const auto gt_blob = cube_indices(g, {4, 4, 4}, {8, 8, 8});
  const auto near_blob = cube_indices(g, {11, 4, 4}, {14, 8, 8});  // gap of 2 along x
  std::vector<std::size_t> pred_voxels = near_blob;

  const LesionDecomposition d =
      decompose_lesions(make_mask(g, gt_blob), make_mask(g, pred_voxels), EvalConfig{});
  CHECK(d.tp == 1);
  CHECK(d.fn == 0);
  CHECK(d.fp == 0);
  REQUIRE(d.matches.size() == 1);
  CHECK(d.matches[0].pred_component_ids == std::vector<int>{1});
  CHECK(d.matches[0].dice == 0.0);  // disjoint voxel sets still match via dilation
}

TEST_CASE("sub-cutoff gt blob with empty prediction leaves nothing to score") {
  const GridGeometry g = iso_grid(16);
  const BinaryMask small_blob = make_mask(g, cube_indices(g, {2, 2, 2}, {4, 4, 4}));  // 27 < 50
  BinaryMask empty;
  empty.geometry = g;
  empty.bits.assign(g.voxel_count(), 0);

  const LesionDecomposition d = decompose_lesions(small_blob, empty, EvalConfig{});
  CHECK(d.gt_lesions.empty());
  CHECK(d.tp == 0);
  CHECK(d.fn == 0);
  CHECK(d.fp == 0);
  CHECK(lesionwise_dice(d) == 1.0);
  CHECK(lesionwise_hd95(d, EvalConfig{}) == 0.0);
}

TEST_CASE("cutoff boundary: 49-voxel lesion excluded, 50-voxel lesion included") {
  const GridGeometry g = iso_grid(16);
  const auto slab49 = cube_indices(g, {2, 2, 5}, {8, 8, 5});  // 7x7x1 = 49
  auto slab50 = slab49;
  slab50.push_back(g.linear_index(2, 2, 6));  // one more adjacent voxel
  std::sort(slab50.begin(), slab50.end());

  const LesionDecomposition d49 =
      decompose_lesions(make_mask(g, slab49), make_mask(g, slab49), EvalConfig{});
  CHECK(d49.gt_lesions.empty());
  CHECK(d49.tp + d49.fn + d49.fp == 0);

  const LesionDecomposition d50 =
      decompose_lesions(make_mask(g, slab50), make_mask(g, slab50), EvalConfig{});
  REQUIRE(d50.gt_lesions.size() == 1);
  CHECK(d50.gt_lesions[0].voxel_count() == 50);
  CHECK(d50.tp == 1);
}

TEST_CASE("raising the cutoff never increases tp + fn") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    PhantomSpec spec;
    spec.seed = 500 + seed;
    spec.dims = {28, 28, 28};
    spec.n_lesions = 2;
    spec.radius_min = 2;
    spec.radius_max = 5;
    const PhantomPair pair = generate_phantom(spec);
    const BinaryMask gm = compose_region(pair.gt, RegionKind::WT);
    const BinaryMask pm = compose_region(pair.pred, RegionKind::WT);
    int previous = std::numeric_limits<int>::max();
    for (long long cutoff : {0LL, 10LL, 50LL, 100LL, 1000LL}) {
      EvalConfig cfg;
      cfg.min_lesion_voxels = cutoff;
      const LesionDecomposition d = decompose_lesions(gm, pm, cfg);
      CHECK(d.tp + d.fn <= previous);
      previous = d.tp + d.fn;
    }
  }
}

TEST_CASE("lesion-wise aggregates evaluate the published formulas") {
  LesionDecomposition d;
  d.matches.push_back({1, {1}, 0.8, 3.0});
  d.matches.push_back({2, {2}, 0.6, 5.0});
  d.matches.push_back({3, {}, 0.0, 374.0});  // FN entry
  d.tp = 2;
  d.fn = 1;
  d.fp = 1;
  CHECK(lesionwise_dice(d) == doctest::Approx((0.8 + 0.6) / 4.0).epsilon(1e-12));

  EvalConfig cfg;
  CHECK(lesionwise_hd95(d, cfg) ==
        doctest::Approx((3.0 + 5.0 + 374.0 * 2) / 4.0).epsilon(1e-12));

  SUBCASE("two matches and one FP reproduce the worked 0.4666... example") {
    LesionDecomposition e;
    e.matches.push_back({1, {1}, 0.8, 0.0});
    e.matches.push_back({2, {2}, 0.6, 0.0});
    e.tp = 2;
    e.fn = 0;
    e.fp = 1;
    CHECK(lesionwise_dice(e) == doctest::Approx(1.4 / 3.0).epsilon(1e-12));
  }
  SUBCASE("single perfect match") {
    LesionDecomposition e;
    e.matches.push_back({1, {1}, 1.0, 0.0});
    e.tp = 1;
    CHECK(lesionwise_dice(e) == 1.0);
    CHECK(lesionwise_hd95(e, cfg) == 0.0);
  }
  SUBCASE("single matched lesion with HD95 4 mm") {
    LesionDecomposition e;
    e.matches.push_back({1, {1}, 0.9, 4.0});
    e.tp = 1;
    CHECK(lesionwise_hd95(e, cfg) == 4.0);
  }
  SUBCASE("one match at 2 mm plus one FN averages with the 374 penalty") {
    LesionDecomposition e;
    e.matches.push_back({1, {1}, 0.9, 2.0});
    e.matches.push_back({2, {}, 0.0, 374.0});
    e.tp = 1;
    e.fn = 1;
    CHECK(lesionwise_hd95(e, cfg) == doctest::Approx(188.0).epsilon(1e-12));
  }
  SUBCASE("all-FN decomposition scores zero dice and the full penalty") {
    LesionDecomposition e;
    e.matches.push_back({1, {}, 0.0, 374.0});
    e.fn = 1;
    CHECK(lesionwise_dice(e) == 0.0);
    CHECK(lesionwise_hd95(e, cfg) == 374.0);
  }
  SUBCASE("nothing left after the cutoff") {
    const LesionDecomposition e;
    CHECK(lesionwise_dice(e) == 1.0);
    CHECK(lesionwise_hd95(e, cfg) == 0.0);
  }
}

TEST_CASE("sensitivity counts voxel-wise true positives over gt") {
  const GridGeometry g = iso_grid(10);
  const auto gt_vox = cube_indices(g, {0, 0, 0}, {4, 4, 3});  // 100 voxels
  const BinaryMask gt = make_mask(g, gt_vox);

  CHECK(sensitivity(gt, gt) == 1.0);

  BinaryMask empty;
  empty.geometry = g;
  empty.bits.assign(g.voxel_count(), 0);
  CHECK(sensitivity(gt, empty) == 0.0);
  CHECK(sensitivity(empty, gt) == 1.0);  // no positives to find
  CHECK(sensitivity(empty, empty) == 1.0);

  // covers 80 of the 100 gt voxels plus 50 extras
  std::vector<std::size_t> pred_vox(gt_vox.begin(), gt_vox.begin() + 80);
  const auto extras = cube_indices(g, {6, 6, 5}, {9, 9, 9});  // 80 candidates
  REQUIRE(extras.size() >= 50);
  pred_vox.insert(pred_vox.end(), extras.begin(), extras.begin() + 50);
  CHECK(sensitivity(gt, make_mask(g, pred_vox)) == doctest::Approx(0.8).epsilon(1e-12));

  BinaryMask other;
  other.geometry = iso_grid(11);
  other.bits.assign(other.geometry.voxel_count(), 0);
  CHECK_THROWS_AS(sensitivity(gt, other), GeometryMismatchError);
}

TEST_CASE("evaluate_case: perfect prediction scores 1 / 0 / 1 everywhere") {
  PhantomSpec spec;
  spec.seed = 31;
  spec.dims = {30, 30, 30};
  spec.n_lesions = 1;
  spec.radius_min = 3;
  spec.radius_max = 5;
  const PhantomPair pair = generate_phantom(spec);
  const CaseMetrics m = evaluate_case(pair.gt, pair.gt, EvalConfig{});
  for (RegionKind region : kAllRegions) {
    CHECK(m[region].lesionwise_dice == 1.0);
    CHECK(m[region].lesionwise_hd95_mm == 0.0);
    CHECK(m[region].volumewise_dice == 1.0);
    CHECK(m[region].sensitivity == 1.0);
    CHECK(m[region].fn == 0);
    CHECK(m[region].fp == 0);
  }
}

TEST_CASE("evaluate_case penalty table") {
  const GridGeometry g = iso_grid(16);
  const auto blob = cube_indices(g, {4, 4, 4}, {8, 8, 8});
  const LabelVolume with_et = volume_with_label(g, blob, 3);
  const LabelVolume background(g, std::vector<std::uint8_t>(g.voxel_count(), 0));
  const EvalConfig cfg;

  SUBCASE("gt region nonempty, prediction empty") {
    const CaseMetrics m = evaluate_case(with_et, background, cfg);
    for (RegionKind region : kAllRegions) {  // label 3 makes all three regions nonempty
      CHECK(m[region].lesionwise_dice == 0.0);
      CHECK(m[region].lesionwise_hd95_mm == 374.0);
      CHECK(m[region].sensitivity == 0.0);
      CHECK(m[region].fn == 1);
    }
  }
  SUBCASE("gt empty, prediction nonempty") {
    const CaseMetrics m = evaluate_case(background, with_et, cfg);
    CHECK(m[RegionKind::ET].lesionwise_dice == 0.0);
    CHECK(m[RegionKind::ET].lesionwise_hd95_mm == 374.0);
    CHECK(m[RegionKind::ET].fp == 1);
    CHECK(m[RegionKind::ET].sensitivity == 1.0);
  }
  SUBCASE("both empty") {
    const CaseMetrics m = evaluate_case(background, background, cfg);
    for (RegionKind region : kAllRegions) {
      CHECK(m[region].lesionwise_dice == 1.0);
      CHECK(m[region].lesionwise_hd95_mm == 0.0);
      CHECK(m[region].volumewise_dice == 1.0);
      CHECK(m[region].sensitivity == 1.0);
    }
  }
  SUBCASE("the whole-mask penalty outranks the cutoff for empty predictions") {
    // 27-voxel gt blob is below the 50-voxel cutoff, but the region-level
    // miss rule fires first: with an empty prediction this scores 0 / 374.
    const LabelVolume tiny = volume_with_label(g, cube_indices(g, {2, 2, 2}, {4, 4, 4}), 3);
    const CaseMetrics m = evaluate_case(tiny, background, cfg);
    CHECK(m[RegionKind::ET].lesionwise_dice == 0.0);
    CHECK(m[RegionKind::ET].lesionwise_hd95_mm == 374.0);
    CHECK(m[RegionKind::ET].fn == 0);  // nothing survives the cutoff
  }
  SUBCASE("identical tiny blobs go through decomposition and score 1 / 0") {
    const LabelVolume tiny = volume_with_label(g, cube_indices(g, {2, 2, 2}, {4, 4, 4}), 3);
    const CaseMetrics m = evaluate_case(tiny, tiny, cfg);
    CHECK(m[RegionKind::ET].lesionwise_dice == 1.0);
    CHECK(m[RegionKind::ET].lesionwise_hd95_mm == 0.0);
  }
  SUBCASE("geometry mismatch") {
    const LabelVolume other(iso_grid(17), std::vector<std::uint8_t>(17 * 17 * 17, 0));
    CHECK_THROWS_AS(evaluate_case(with_et, other, cfg), GeometryMismatchError);
  }
}

TEST_CASE("evaluate_case matches the brute-force oracle on small random phantoms") {
  const Perturbation perturbations[] = {
      parse_perturbation("none"),        parse_perturbation("erode"),
      parse_perturbation("dilate"),      parse_perturbation("shift:2,1,0"),
      parse_perturbation("drop:ET"),     parse_perturbation("falseblob:1,2"),
  };
  const EvalConfig cfg;
  for (std::uint64_t i = 0; i < 18; ++i) {
    PhantomSpec spec;
    spec.seed = 9000 + i;
    spec.dims = {24, 24, 24};
    spec.n_lesions = 1 + static_cast<int>(i % 2);
    spec.radius_min = 2;
    spec.radius_max = 4;
    spec.perturbation = perturbations[i % std::size(perturbations)];
    if (spec.perturbation.kind == PerturbationKind::add_false_blob) {
      spec.n_lesions = 1;  // leave room for the extra blob on the small grid
      spec.dims = {28, 28, 28};
    }
    const PhantomPair pair = generate_phantom(spec);
    const CaseMetrics ours = evaluate_case(pair.gt, pair.pred, cfg);
    for (RegionKind region : kAllRegions) {
      const oracle::RegionScore ref = oracle::evaluate_region(pair.gt, pair.pred, region, cfg);
      INFO("seed ", spec.seed, " region ", region_name(region));
      CHECK(std::fabs(ours[region].lesionwise_dice - ref.lesionwise_dice) <= 1e-9);
      CHECK(std::fabs(ours[region].lesionwise_hd95_mm - ref.lesionwise_hd95) <= 1e-6);
      CHECK(ours[region].tp == ref.tp);
      CHECK(ours[region].fn == ref.fn);
      CHECK(ours[region].fp == ref.fp);
    }
  }
}

TEST_CASE("evaluation config file round trip, defaults and rejection") {
  testutil::TempDir tmp("cfg");
  EvalConfig cfg;
  cfg.dilation_iterations = 1;
  cfg.connectivity = 6;
  cfg.min_lesion_voxels = 10;
  cfg.missing_region_hd95_mm = 100.5;
  cfg.unmatched_lesion_hd95_mm = 99.25;
  cfg.hd_percentile = 0.9;
  save_eval_config(cfg, tmp.path() / "cfg.txt");
  const EvalConfig back = load_eval_config(tmp.path() / "cfg.txt");
  CHECK(back.dilation_iterations == 1);
  CHECK(back.connectivity == 6);
  CHECK(back.min_lesion_voxels == 10);
  CHECK(back.missing_region_hd95_mm == 100.5);
  CHECK(back.unmatched_lesion_hd95_mm == 99.25);
  CHECK(back.hd_percentile == 0.9);

  {
    std::ofstream f(tmp.path() / "partial.txt");
    f << "# only one override\nmin_lesion_voxels = 5\n\n";
  }
  const EvalConfig partial = load_eval_config(tmp.path() / "partial.txt");
  CHECK(partial.min_lesion_voxels == 5);
  CHECK(partial.dilation_iterations == 3);  // untouched defaults
  CHECK(partial.connectivity == 26);
  CHECK(partial.missing_region_hd95_mm == 374.0);
  CHECK(partial.hd_percentile == 0.95);

  {
    std::ofstream f(tmp.path() / "unknown.txt");
    f << "no_such_key = 1\n";
  }
  CHECK_THROWS_AS(load_eval_config(tmp.path() / "unknown.txt"), UsageError);

  {
    std::ofstream f(tmp.path() / "badconn.txt");
    f << "connectivity = 18\n";
  }
  CHECK_THROWS_AS(load_eval_config(tmp.path() / "badconn.txt"), UsageError);
  CHECK_THROWS_AS(load_eval_config(tmp.path() / "missing.txt"), IoError);

  EvalConfig bad;
  bad.hd_percentile = 1.5;
  CHECK_THROWS_AS(bad.validate(), UsageError);
}
