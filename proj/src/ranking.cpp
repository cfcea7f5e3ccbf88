#include "lesioneval/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "lesioneval/csv.hpp"
#include "lesioneval/errors.hpp"
#include "lesioneval/rng.hpp"

namespace lesioneval {
namespace {

constexpr std::size_t kTupleStride = 6;  // 3 regions x 2 metrics

std::string tuple_name(const std::string& team, const std::string& subject, RegionKind region,
                       RankedMetric metric) {
  return "(" + team + "," + subject + "," + region_name(region) + "," +
         ranked_metric_name(metric) + ")";
}

/// RNG stream for one pair, independent of argument order and of which
/// other pairs run first.
std::mt19937_64 pair_engine(std::uint64_t seed, std::string_view a, std::string_view b) {
  std::string lo{a < b ? a : b};
  std::string hi{a < b ? b : a};
  std::uint64_t state = seed ^ (fnv1a64(lo + '\x1f' + hi) * 0x9e3779b97f4a7c15ULL);
  return std::mt19937_64(splitmix64(state));
}

}  // namespace

const char* ranked_metric_name(RankedMetric m) {
  return m == RankedMetric::dice ? "dice" : "hd95";
}

const char* scaling_mode_name(ScalingMode mode) {
  switch (mode) {
    case ScalingMode::mean_of_6: return "mean-of-6";
    case ScalingMode::sum_of_6: return "sum-of-6";
    case ScalingMode::region_sum_metric_mean: return "region-sum-metric-mean";
  }
  return "?";
}

ScalingMode parse_scaling_mode(std::string_view name) {
  if (name == "mean-of-6") return ScalingMode::mean_of_6;
  if (name == "sum-of-6") return ScalingMode::sum_of_6;
  if (name == "region-sum-metric-mean") return ScalingMode::region_sum_metric_mean;
  throw UsageError("unknown scaling mode '" + std::string(name) + "'");
}

MetricTable load_metric_table_csv(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw UsageError("metrics CSV " + path.string() + " is empty");
  {
    const auto header = split_csv_line(lines[0]);
    const std::vector<std::string> expected{"team", "subject", "region", "metric", "value"};
    if (header != expected)
      throw FormatError(path.string() + ": header must be team,subject,region,metric,value");
  }

  struct Entry {
    std::size_t team, subject;
    RegionKind region;
    RankedMetric metric;
    double value;
  };
  std::vector<Entry> entries;
  MetricTable table;
  std::unordered_map<std::string, std::size_t> team_ids, subject_ids;

  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty() || lines[li] == "\r") continue;
    const auto fields = split_csv_line(lines[li]);
    if (fields.size() != 5)
      throw FormatError(path.string() + " line " + std::to_string(li + 1) +
                        ": expected 5 fields, got " + std::to_string(fields.size()));
    const std::string& team = fields[0];
    const std::string& subject = fields[1];
    if (team.empty() || subject.empty())
      throw FormatError(path.string() + " line " + std::to_string(li + 1) +
                        ": empty team or subject");
    const RegionKind region = parse_region(fields[2]);
    RankedMetric metric;
    if (fields[3] == "dice") {
      metric = RankedMetric::dice;
    } else if (fields[3] == "hd95") {
      metric = RankedMetric::hd95;
    } else if (fields[3] == "sensitivity") {
      continue;  // reporting-only metric, not ranked
    } else {
      throw FormatError(path.string() + " line " + std::to_string(li + 1) +
                        ": unknown metric '" + fields[3] + "'");
    }
    const double value = parse_double(fields[4], "metric value");
    if (!std::isfinite(value))
      throw FormatError(path.string() + " line " + std::to_string(li + 1) +
                        ": non-finite value");

    auto team_it = team_ids.find(team);
    if (team_it == team_ids.end()) {
      team_it = team_ids.emplace(team, table.teams.size()).first;
      table.teams.push_back(team);
    }
    auto subj_it = subject_ids.find(subject);
    if (subj_it == subject_ids.end()) {
      subj_it = subject_ids.emplace(subject, table.subjects.size()).first;
      table.subjects.push_back(subject);
    }
    entries.push_back({team_it->second, subj_it->second, region, metric, value});
  }
  if (table.teams.empty()) throw UsageError("metrics CSV " + path.string() + " has no data rows");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  table.values.assign(table.teams.size() * table.subjects.size() * kTupleStride, nan);
  for (const Entry& e : entries) {
    double& slot = table.values[table.index(e.team, e.subject, e.region, e.metric)];
    if (!std::isnan(slot))
      throw IncompleteTableError("duplicate tuple " + tuple_name(table.teams[e.team],
                                                                 table.subjects[e.subject],
                                                                 e.region, e.metric));
    slot = e.value;
  }
  for (std::size_t t = 0; t < table.teams.size(); ++t)
    for (std::size_t s = 0; s < table.subjects.size(); ++s)
      for (RegionKind region : kAllRegions)
        for (RankedMetric metric : {RankedMetric::dice, RankedMetric::hd95})
          if (std::isnan(table.value(t, s, region, metric)))
            throw IncompleteTableError("missing tuple " + tuple_name(table.teams[t],
                                                                     table.subjects[s], region,
                                                                     metric));
  return table;
}

std::vector<double> rank_values(const std::vector<double>& values, bool higher_is_better) {
  if (values.empty()) throw ContractError("rank_values: empty input");
  for (double v : values)
    if (!std::isfinite(v)) throw ContractError("rank_values: non-finite value");

  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return higher_is_better ? values[a] > values[b] : values[a] < values[b];
  });

  std::vector<double> ranks(values.size(), 0.0);
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j < idx.size() && values[idx[j]] == values[idx[i]]) ++j;
    // Tied block spans ranks i+1 .. j; everyone gets the average.
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[idx[k]] = rank;
    i = j;
  }
  return ranks;
}

std::size_t RankTable::team_index(std::string_view team) const {
  for (std::size_t t = 0; t < teams.size(); ++t)
    if (teams[t] == team) return t;
  throw LookupError("unknown team '" + std::string(team) + "'");
}

double frs_from_cumulative(std::span<const double> per_subject_cumulative) {
  if (per_subject_cumulative.empty()) throw ContractError("frs: no subjects");
  double sum = 0.0;
  for (double c : per_subject_cumulative) sum += c;
  return sum / static_cast<double>(per_subject_cumulative.size());
}

RankTable build_rank_table(const MetricTable& table, ScalingMode mode) {
  RankTable r;
  r.teams = table.teams;
  r.subjects = table.subjects;
  r.scaling_mode = mode;
  const std::size_t n_teams = r.teams.size();
  const std::size_t n_subjects = r.subjects.size();
  r.individual_ranks.assign(n_teams * n_subjects * kTupleStride, 0.0);

  std::vector<double> column(n_teams);
  for (std::size_t s = 0; s < n_subjects; ++s) {
    for (RegionKind region : kAllRegions) {
      for (RankedMetric metric : {RankedMetric::dice, RankedMetric::hd95}) {
        for (std::size_t t = 0; t < n_teams; ++t) column[t] = table.value(t, s, region, metric);
        const std::vector<double> ranks = rank_values(column, metric == RankedMetric::dice);
        for (std::size_t t = 0; t < n_teams; ++t)
          r.individual_ranks[r.rank_index(t, s, region, metric)] = ranks[t];
      }
    }
  }

  // Ranks are half-integers (tie averages of integers), so the per-subject
  // 6-rank sums and their totals are exact. Scaling by the mode's factor
  // happens once at the end; this keeps exact FRS ties tied in every mode
  // and makes the team ordering provably mode-independent.
  const double factor = mode == ScalingMode::mean_of_6              ? 6.0
                        : mode == ScalingMode::region_sum_metric_mean ? 2.0
                                                                      : 1.0;
  std::vector<double> rank_sum_totals(n_teams, 0.0);
  r.cumulative.assign(n_teams * n_subjects, 0.0);
  for (std::size_t t = 0; t < n_teams; ++t) {
    for (std::size_t s = 0; s < n_subjects; ++s) {
      double sum6 = 0.0;
      for (RegionKind region : kAllRegions)
        for (RankedMetric metric : {RankedMetric::dice, RankedMetric::hd95})
          sum6 += r.individual_ranks[r.rank_index(t, s, region, metric)];
      r.cumulative[t * n_subjects + s] = sum6 / factor;
      rank_sum_totals[t] += sum6;
    }
  }

  r.frs.resize(n_teams);
  for (std::size_t t = 0; t < n_teams; ++t)
    r.frs[t] = rank_sum_totals[t] / static_cast<double>(n_subjects) / factor;

  r.order.resize(n_teams);
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::sort(r.order.begin(), r.order.end(), [&](std::size_t a, std::size_t b) {
    if (rank_sum_totals[a] != rank_sum_totals[b])
      return rank_sum_totals[a] < rank_sum_totals[b];
    return r.teams[a] < r.teams[b];
  });
  return r;
}

PermutationResult permutation_test(const RankTable& table, std::string_view team_a,
                                   std::string_view team_b, long long n_permutations,
                                   std::uint64_t seed, GapComparison comparison,
                                   GapSidedness sidedness) {
  if (team_a == team_b) throw UsageError("permutation test needs two distinct teams");
  if (n_permutations < 1) throw UsageError("n_permutations must be >= 1");
  const std::size_t a = table.team_index(team_a);
  const std::size_t b = table.team_index(team_b);
  const std::size_t n_subjects = table.subjects.size();

  // Per-subject contribution to FRS(a) - FRS(b); a swap flips its sign.
  std::vector<double> contribution(n_subjects);
  for (std::size_t s = 0; s < n_subjects; ++s)
    contribution[s] = (table.cumulative_rank(a, s) - table.cumulative_rank(b, s)) /
                      static_cast<double>(n_subjects);

  const double observed_signed = std::accumulate(contribution.begin(), contribution.end(), 0.0);
  const auto statistic = [&](double signed_gap) {
    return sidedness == GapSidedness::two_sided ? std::fabs(signed_gap) : -signed_gap;
  };
  const double observed = statistic(observed_signed);

  std::mt19937_64 engine = pair_engine(seed, team_a, team_b);
  long long exceed = 0;
  for (long long p = 0; p < n_permutations; ++p) {
    double acc = 0.0;
    for (std::size_t s = 0; s < n_subjects; ++s) {
      const bool swap = (engine() & 1u) != 0;
      acc += swap ? -contribution[s] : contribution[s];
    }
    const double stat = statistic(acc);
    if (comparison == GapComparison::greater_equal ? stat >= observed : stat > observed) ++exceed;
  }

  PermutationResult result;
  result.team_a = std::string(team_a);
  result.team_b = std::string(team_b);
  result.observed_gap = observed;
  result.p_value = static_cast<double>(1 + exceed) / static_cast<double>(1 + n_permutations);
  result.n_permutations = n_permutations;
  result.seed = seed;
  return result;
}

const PermutationResult& PairwiseMatrix::at(std::size_t i, std::size_t j) const {
  if (i >= j || j >= teams.size()) throw LookupError("pairwise matrix wants i < j < team count");
  const std::size_t n = teams.size();
  // Row-major packing of the strict upper triangle.
  const std::size_t offset = i * (2 * n - i - 1) / 2 + (j - i - 1);
  return entries[offset];
}

PairwiseMatrix pairwise_matrix(const RankTable& table, long long n_permutations,
                               std::uint64_t seed, GapComparison comparison,
                               GapSidedness sidedness) {
  if (table.teams.size() < 2) throw UsageError("pairwise matrix needs at least 2 teams");
  PairwiseMatrix matrix;
  for (std::size_t idx : table.order) matrix.teams.push_back(table.teams[idx]);
  for (std::size_t i = 0; i < matrix.teams.size(); ++i)
    for (std::size_t j = i + 1; j < matrix.teams.size(); ++j)
      matrix.entries.push_back(permutation_test(table, matrix.teams[i], matrix.teams[j],
                                                n_permutations, seed, comparison, sidedness));
  return matrix;
}

void write_ranks_csv(const RankTable& table, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "team,subject,cumulative_rank\n";
  for (std::size_t idx : table.order)
    for (std::size_t s = 0; s < table.subjects.size(); ++s)
      out << table.teams[idx] << ',' << table.subjects[s] << ','
          << format_g17(table.cumulative_rank(idx, s)) << '\n';
  write_text_file(path, out.str());
}

void write_frs_csv(const RankTable& table, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "team,frs,rank\n";
  for (std::size_t place = 0; place < table.order.size(); ++place)
    out << table.teams[table.order[place]] << ',' << format_g17(table.frs[table.order[place]])
        << ',' << place + 1 << '\n';
  write_text_file(path, out.str());
}

void write_pvalue_matrix_csv(const PairwiseMatrix& matrix, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "team";
  for (const std::string& t : matrix.teams) out << ',' << t;
  out << '\n';
  for (std::size_t i = 0; i < matrix.teams.size(); ++i) {
    out << matrix.teams[i];
    for (std::size_t j = 0; j < matrix.teams.size(); ++j) {
      out << ',';
      if (j > i) out << format_g17(matrix.at(i, j).p_value);
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

std::string render_leaderboard(const RankTable& table) {
  std::ostringstream out;
  out << "rank  team                      frs\n";
  for (std::size_t place = 0; place < table.order.size(); ++place) {
    const std::size_t idx = table.order[place];
    std::string team = table.teams[idx];
    if (team.size() < 24) team.append(24 - team.size(), ' ');
    // Published ranking tables truncate the score at 2 decimals.
    out << place + 1 << "     " << team << "  " << format_fixed_trunc(table.frs[idx], 2) << '\n';
  }
  return out.str();
}

}  // namespace lesioneval
