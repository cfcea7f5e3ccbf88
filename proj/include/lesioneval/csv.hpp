#ifndef LESIONEVAL_CSV_HPP
#define LESIONEVAL_CSV_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lesioneval {

/// Splits one CSV line on commas; trailing '\r' is stripped. Fields in this
/// project's schemas never contain commas or quotes, so no quoting rules.
std::vector<std::string> split_csv_line(std::string_view line);

/// All lines of a text file; throws IoError when unreadable.
std::vector<std::string> read_lines(const std::filesystem::path& path);

/// Writes a whole text file; throws IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// 17 significant digits -- enough to round-trip a double exactly.
std::string format_g17(double v);

/// Fixed decimals, half-up rounding ("0.405" -> "0.41" at 2 decimals).
std::string format_fixed_half_up(double v, int decimals);

/// Fixed decimals, truncated toward zero ("11.9375" -> "11.93").
std::string format_fixed_trunc(double v, int decimals);

/// Parses a double; throws FormatError on junk or trailing characters.
double parse_double(std::string_view text, std::string_view what);

}  // namespace lesioneval

#endif
