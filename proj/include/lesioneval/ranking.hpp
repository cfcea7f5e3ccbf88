#ifndef LESIONEVAL_RANKING_HPP
#define LESIONEVAL_RANKING_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lesioneval/regions.hpp"

namespace lesioneval {

/// The two ranked metrics. Dice is higher-is-better, HD95 lower-is-better.
enum class RankedMetric { dice = 0, hd95 = 1 };

const char* ranked_metric_name(RankedMetric m);

/// Complete (team, subject, region, metric) -> value grid. Every tuple must
/// be present and finite.
struct MetricTable {
  std::vector<std::string> teams;
  std::vector<std::string> subjects;
  std::vector<double> values;  // [team][subject][region][metric]

  std::size_t index(std::size_t team, std::size_t subject, RegionKind region,
                    RankedMetric metric) const {
    return ((team * subjects.size() + subject) * 3 + static_cast<std::size_t>(region)) * 2 +
           static_cast<std::size_t>(metric);
  }
  double value(std::size_t team, std::size_t subject, RegionKind region,
               RankedMetric metric) const {
    return values[index(team, subject, region, metric)];
  }
};

/// Loads the `team,subject,region,metric,value` CSV. metric must be dice or
/// hd95; sensitivity rows are tolerated and skipped so batch outputs with
/// --sensitivity remain rankable. Duplicate tuples and missing tuples throw
/// IncompleteTableError naming the tuple; non-finite values are rejected.
MetricTable load_metric_table_csv(const std::filesystem::path& path);

/// Fractional ranks, best value = rank 1, ties averaged. Throws
/// ContractError on empty input or non-finite values.
std::vector<double> rank_values(const std::vector<double>& values, bool higher_is_better);

/// How a team's 6 individual ranks per subject collapse into the subject's
/// cumulative rank. All three are positive multiples of one another, so the
/// final team ordering is identical; region_sum_metric_mean (mean over the
/// 2 metrics, summed over the 3 regions) reproduces the published score
/// magnitudes and is the default.
enum class ScalingMode { mean_of_6, sum_of_6, region_sum_metric_mean };

const char* scaling_mode_name(ScalingMode mode);
ScalingMode parse_scaling_mode(std::string_view name);

struct RankTable {
  std::vector<std::string> teams;     // input order
  std::vector<std::string> subjects;  // input order
  ScalingMode scaling_mode = ScalingMode::region_sum_metric_mean;
  std::vector<double> individual_ranks;  // [team][subject][region][metric]
  std::vector<double> cumulative;        // [team][subject]
  std::vector<double> frs;               // [team]
  std::vector<std::size_t> order;        // team indices, ascending FRS

  std::size_t rank_index(std::size_t team, std::size_t subject, RegionKind region,
                         RankedMetric metric) const {
    return ((team * subjects.size() + subject) * 3 + static_cast<std::size_t>(region)) * 2 +
           static_cast<std::size_t>(metric);
  }
  double cumulative_rank(std::size_t team, std::size_t subject) const {
    return cumulative[team * subjects.size() + subject];
  }
  std::size_t team_index(std::string_view team) const;  // throws LookupError
};

/// Mean of the per-subject cumulative ranks; the final ranking score.
double frs_from_cumulative(std::span<const double> per_subject_cumulative);

/// Ranks every (subject, region, metric) tuple across teams, collapses per
/// subject under `mode`, and averages across subjects into the FRS.
RankTable build_rank_table(const MetricTable& table,
                           ScalingMode mode = ScalingMode::region_sum_metric_mean);

/// Exceedance comparison for the permutation test: permuted-gap >= observed
/// (inclusive, default) or strictly >.
enum class GapComparison { greater_equal, greater };
/// Two-sided uses |FRS(a)-FRS(b)|; one-sided uses FRS(b)-FRS(a) signed.
enum class GapSidedness { two_sided, one_sided };

struct PermutationResult {
  std::string team_a;
  std::string team_b;
  double observed_gap = 0.0;
  double p_value = 1.0;
  long long n_permutations = 0;
  std::uint64_t seed = 0;
};

/// Permutation test between two teams: each round independently swaps the
/// pair's cumulative ranks per subject with probability 1/2 and records the
/// permuted FRS gap; p = (1 + #exceedances) / (1 + n). The RNG stream is
/// derived from (seed, the two team names), so results do not depend on
/// execution order and are byte-identical for a fixed seed.
PermutationResult permutation_test(const RankTable& table, std::string_view team_a,
                                   std::string_view team_b, long long n_permutations,
                                   std::uint64_t seed,
                                   GapComparison comparison = GapComparison::greater_equal,
                                   GapSidedness sidedness = GapSidedness::two_sided);

/// Upper-triangular pairwise p-values with teams ordered by ascending FRS.
struct PairwiseMatrix {
  std::vector<std::string> teams;           // ascending FRS
  std::vector<PermutationResult> entries;   // row-major upper triangle, i < j

  const PermutationResult& at(std::size_t i, std::size_t j) const;
};

PairwiseMatrix pairwise_matrix(const RankTable& table, long long n_permutations,
                               std::uint64_t seed,
                               GapComparison comparison = GapComparison::greater_equal,
                               GapSidedness sidedness = GapSidedness::two_sided);

// CSV emission. Numeric cells carry 17 significant digits; rounding happens
// only in the rendered leaderboard.
void write_ranks_csv(const RankTable& table, const std::filesystem::path& path);
void write_frs_csv(const RankTable& table, const std::filesystem::path& path);
void write_pvalue_matrix_csv(const PairwiseMatrix& matrix, const std::filesystem::path& path);

/// Plain-text leaderboard, ascending FRS, scores truncated to 2 decimals
/// (the convention the published ranking table uses).
std::string render_leaderboard(const RankTable& table);

}  // namespace lesioneval

#endif
