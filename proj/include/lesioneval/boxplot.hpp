#ifndef LESIONEVAL_BOXPLOT_HPP
#define LESIONEVAL_BOXPLOT_HPP

#include <string>
#include <vector>

#include "lesioneval/summary.hpp"

namespace lesioneval {

/// Tukey box statistics. Quartiles use linear interpolation between order
/// statistics (quantile position (n-1)*p); whiskers reach the most extreme
/// data points within 1.5*IQR of the box; everything beyond is an outlier.
struct BoxStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
};

/// Interpolated quantile of a sample, p in [0,1]. Throws UsageError on an
/// empty sample.
double quantile(std::vector<double> values, double p);

BoxStats compute_box_stats(const std::vector<double>& values);

/// One box group (`<g class="box">`) per team, teams sorted by name;
/// deterministic output for a fixed input. Throws UsageError when the
/// region/metric selection matches no rows.
std::string render_boxplot_svg(const std::vector<MetricRow>& rows, RegionKind region,
                               const std::string& metric);

}  // namespace lesioneval

#endif
