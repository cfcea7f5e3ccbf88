#ifndef LESIONEVAL_SUMMARY_HPP
#define LESIONEVAL_SUMMARY_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "lesioneval/regions.hpp"

namespace lesioneval {

/// One record of the long-format metrics CSV (`team,subject,region,metric,value`).
struct MetricRow {
  std::string team;
  std::string subject;
  RegionKind region = RegionKind::ET;
  std::string metric;  // dice, hd95 or sensitivity
  double value = 0.0;
};

/// Generic reader for the metrics CSV; keeps every metric name it knows
/// (dice, hd95, sensitivity). Used by summary and boxplot, which do not
/// need the completeness guarantees of the ranking loader.
std::vector<MetricRow> load_metric_rows_csv(const std::filesystem::path& path);

double mean_of(const std::vector<double>& values);
/// Middle element, or the average of the two middle elements.
double median_of(std::vector<double> values);
enum class StdMode { population, sample };
double std_of(const std::vector<double>& values, StdMode mode);

/// Per-(team, region, metric) aggregate in the "mean +/- std (median)"
/// reporting scheme.
struct SummaryRow {
  std::string team;
  RegionKind region = RegionKind::ET;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  double median = 0.0;
};

/// Aggregates rows over subjects. Throws UsageError on empty input.
std::vector<SummaryRow> summarize_metrics(const std::vector<MetricRow>& rows,
                                          StdMode std_mode = StdMode::population);

/// "M ± S (Md)" with half-up 2-decimal rounding.
std::string format_summary_cell(double mean, double std, double median);

/// One Markdown table per region; columns Dice, HD95, Sensitivity per team
/// (a missing metric renders as "n/a").
std::string render_summary_markdown(const std::vector<SummaryRow>& rows);

/// `team,region,metric,mean,std,median` at full precision.
std::string render_summary_csv(const std::vector<SummaryRow>& rows);

}  // namespace lesioneval

#endif
