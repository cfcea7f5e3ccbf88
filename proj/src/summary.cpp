#include "lesioneval/summary.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "lesioneval/csv.hpp"
#include "lesioneval/errors.hpp"

namespace lesioneval {
namespace {

int metric_order(const std::string& metric) {
  if (metric == "dice") return 0;
  if (metric == "hd95") return 1;
  return 2;  // sensitivity
}

}  // namespace

std::vector<MetricRow> load_metric_rows_csv(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw UsageError("metrics CSV " + path.string() + " is empty");
  {
    const auto header = split_csv_line(lines[0]);
    const std::vector<std::string> expected{"team", "subject", "region", "metric", "value"};
    if (header != expected)
      throw FormatError(path.string() + ": header must be team,subject,region,metric,value");
  }
  std::vector<MetricRow> rows;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty() || lines[li] == "\r") continue;
    const auto fields = split_csv_line(lines[li]);
    if (fields.size() != 5)
      throw FormatError(path.string() + " line " + std::to_string(li + 1) +
                        ": expected 5 fields, got " + std::to_string(fields.size()));
    MetricRow row;
    row.team = fields[0];
    row.subject = fields[1];
    row.region = parse_region(fields[2]);
    row.metric = fields[3];
    if (row.metric != "dice" && row.metric != "hd95" && row.metric != "sensitivity")
      throw FormatError(path.string() + " line " + std::to_string(li + 1) +
                        ": unknown metric '" + row.metric + "'");
    row.value = parse_double(fields[4], "metric value");
    if (!std::isfinite(row.value))
      throw FormatError(path.string() + " line " + std::to_string(li + 1) + ": non-finite value");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw UsageError("metrics CSV " + path.string() + " has no data rows");
  return rows;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) throw UsageError("mean of empty sample");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw UsageError("median of empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double std_of(const std::vector<double>& values, StdMode mode) {
  if (values.empty()) throw UsageError("std of empty sample");
  if (mode == StdMode::sample && values.size() < 2)
    throw UsageError("sample std needs at least 2 values");
  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  const double denom =
      mode == StdMode::population ? static_cast<double>(values.size())
                                  : static_cast<double>(values.size() - 1);
  return std::sqrt(ss / denom);
}

std::vector<SummaryRow> summarize_metrics(const std::vector<MetricRow>& rows, StdMode std_mode) {
  if (rows.empty()) throw UsageError("no metric rows to summarize");
  // (team, region, metric order, metric) -> samples over subjects
  std::map<std::tuple<std::string, int, int, std::string>, std::vector<double>> groups;
  for (const MetricRow& row : rows)
    groups[{row.team, static_cast<int>(row.region), metric_order(row.metric), row.metric}]
        .push_back(row.value);

  std::vector<SummaryRow> out;
  for (const auto& [key, samples] : groups) {
    SummaryRow s;
    s.team = std::get<0>(key);
    s.region = static_cast<RegionKind>(std::get<1>(key));
    s.metric = std::get<3>(key);
    s.mean = mean_of(samples);
    s.std = std_of(samples, std_mode);
    s.median = median_of(samples);
    out.push_back(std::move(s));
  }
  return out;
}

std::string format_summary_cell(double mean, double std, double median) {
  return format_fixed_half_up(mean, 2) + " \xC2\xB1 " + format_fixed_half_up(std, 2) + " (" +
         format_fixed_half_up(median, 2) + ")";
}

std::string render_summary_markdown(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  for (RegionKind region : kAllRegions) {
    // team -> metric -> cell
    std::map<std::string, std::map<std::string, std::string>> cells;
    for (const SummaryRow& r : rows)
      if (r.region == region)
        cells[r.team][r.metric] = format_summary_cell(r.mean, r.std, r.median);
    if (cells.empty()) continue;
    out << "## " << region_name(region) << "\n\n"
        << "| Team | Dice | HD95 (mm) | Sensitivity |\n"
        << "|---|---|---|---|\n";
    for (const auto& [team, per_metric] : cells) {
      out << "| " << team;
      for (const char* metric : {"dice", "hd95", "sensitivity"}) {
        const auto it = per_metric.find(metric);
        out << " | " << (it == per_metric.end() ? std::string("n/a") : it->second);
      }
      out << " |\n";
    }
    out << '\n';
  }
  return out.str();
}

std::string render_summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "team,region,metric,mean,std,median\n";
  for (const SummaryRow& r : rows)
    out << r.team << ',' << region_name(r.region) << ',' << r.metric << ',' << format_g17(r.mean)
        << ',' << format_g17(r.std) << ',' << format_g17(r.median) << '\n';
  return out.str();
}

}  // namespace lesioneval
