#include "lesioneval/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lesioneval/errors.hpp"

namespace lesioneval {

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_fixed_half_up(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double sign = v < 0.0 ? -1.0 : 1.0;
  const double rounded = sign * std::floor(std::fabs(v) * scale + 0.5) / scale;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, rounded);
  return buf;
}

std::string format_fixed_trunc(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  // The 1e-9 nudge keeps values an ulp below an integer boundary from
  // truncating to the wrong side.
  const double sign = v < 0.0 ? -1.0 : 1.0;
  const double truncated = sign * std::floor(std::fabs(v) * scale + 1e-9) / scale;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, truncated);
  return buf;
}

double parse_double(std::string_view text, std::string_view what) {
  std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw FormatError("cannot parse " + std::string(what) + " from '" + s + "'");
  }
  while (used < s.size() && (s[used] == ' ' || s[used] == '\t')) ++used;
  if (used != s.size())
    throw FormatError("trailing characters after " + std::string(what) + " in '" + s + "'");
  return v;
}

}  // namespace lesioneval
