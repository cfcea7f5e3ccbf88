#include "lesioneval/boxplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "lesioneval/errors.hpp"

namespace lesioneval {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string num_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw UsageError("quantile of empty sample");
  std::sort(values.begin(), values.end());
  if (p <= 0.0) return values.front();
  if (p >= 1.0) return values.back();
  // Linear interpolation between order statistics at position (n-1)*p.
  const double pos = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= values.size()) return values[lo];
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

BoxStats compute_box_stats(const std::vector<double>& values) {
  if (values.empty()) throw UsageError("box stats of empty sample");
  BoxStats box;
  box.q1 = quantile(values, 0.25);
  box.median = quantile(values, 0.5);
  box.q3 = quantile(values, 0.75);
  const double iqr = box.q3 - box.q1;
  const double lo_fence = box.q1 - 1.5 * iqr;
  const double hi_fence = box.q3 + 1.5 * iqr;
  box.whisker_low = box.q1;
  box.whisker_high = box.q3;
  bool any_in = false;
  for (double v : values) {
    if (v >= lo_fence && v <= hi_fence) {
      if (!any_in) {
        box.whisker_low = box.whisker_high = v;
        any_in = true;
      } else {
        box.whisker_low = std::min(box.whisker_low, v);
        box.whisker_high = std::max(box.whisker_high, v);
      }
    } else {
      box.outliers.push_back(v);
    }
  }
  std::sort(box.outliers.begin(), box.outliers.end());
  return box;
}

std::string render_boxplot_svg(const std::vector<MetricRow>& rows, RegionKind region,
                               const std::string& metric) {
  std::map<std::string, std::vector<double>> per_team;
  for (const MetricRow& row : rows)
    if (row.region == region && row.metric == metric) per_team[row.team].push_back(row.value);
  if (per_team.empty())
    throw UsageError(std::string("no rows for region ") + region_name(region) + " metric " +
                     metric);

  double lo = per_team.begin()->second.front();
  double hi = lo;
  for (const auto& [team, values] : per_team)
    for (double v : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi - lo < 1e-12) {  // degenerate spread: open the axis up
    lo -= 1.0;
    hi += 1.0;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }

  const double margin_left = 64.0, margin_top = 44.0, margin_bottom = 56.0;
  const double slot = 84.0, plot_h = 360.0, box_w = 36.0;
  const double width = margin_left + slot * static_cast<double>(per_team.size()) + 24.0;
  const double height = margin_top + plot_h + margin_bottom;
  const auto y_of = [&](double v) { return margin_top + (hi - v) / (hi - lo) * plot_h; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n"
      << "<title>" << region_name(region) << ' ' << metric << "</title>\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << num(margin_left) << "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"16\">"
      << region_name(region) << " \xE2\x80\x94 " << metric << "</text>\n";

  // y axis with 5 ticks
  svg << "<line x1=\"" << num(margin_left) << "\" y1=\"" << num(margin_top) << "\" x2=\""
      << num(margin_left) << "\" y2=\"" << num(margin_top + plot_h)
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    const double y = y_of(v);
    svg << "<line x1=\"" << num(margin_left - 5) << "\" y1=\"" << num(y) << "\" x2=\""
        << num(margin_left) << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << num(margin_left - 9) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num_g(v)
        << "</text>\n";
  }

  std::size_t slot_index = 0;
  for (const auto& [team, values] : per_team) {
    const BoxStats box = compute_box_stats(values);
    const double cx = margin_left + slot * (static_cast<double>(slot_index) + 0.5);
    svg << "<g class=\"box\" data-team=\"" << team << "\">\n"
        << "<line x1=\"" << num(cx) << "\" y1=\"" << num(y_of(box.whisker_low)) << "\" x2=\""
        << num(cx) << "\" y2=\"" << num(y_of(box.whisker_high)) << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << num(cx - box_w / 2) << "\" y1=\"" << num(y_of(box.whisker_low))
        << "\" x2=\"" << num(cx + box_w / 2) << "\" y2=\"" << num(y_of(box.whisker_low))
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << num(cx - box_w / 2) << "\" y1=\"" << num(y_of(box.whisker_high))
        << "\" x2=\"" << num(cx + box_w / 2) << "\" y2=\"" << num(y_of(box.whisker_high))
        << "\" stroke=\"black\"/>\n"
        << "<rect x=\"" << num(cx - box_w / 2) << "\" y=\"" << num(y_of(box.q3)) << "\" width=\""
        << num(box_w) << "\" height=\"" << num(std::max(0.0, y_of(box.q1) - y_of(box.q3)))
        << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n"
        << "<line x1=\"" << num(cx - box_w / 2) << "\" y1=\"" << num(y_of(box.median))
        << "\" x2=\"" << num(cx + box_w / 2) << "\" y2=\"" << num(y_of(box.median))
        << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    for (double outlier : box.outliers)
      svg << "<circle cx=\"" << num(cx) << "\" cy=\"" << num(y_of(outlier))
          << "\" r=\"2.5\" fill=\"black\"/>\n";
    svg << "<text x=\"" << num(cx) << "\" y=\"" << num(margin_top + plot_h + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << team
        << "</text>\n"
        << "</g>\n";
    ++slot_index;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace lesioneval
