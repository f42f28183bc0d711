#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace citedyn::csv {

/// Header-indexed table. `line_numbers[i]` is the 1-based source line of row i.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  /// Column index; throws SchemaError naming the missing column.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

/// Splits one line, honouring double-quoted fields.
std::vector<std::string> split_line(std::string_view line);

/// Reads a whole CSV stream. Blank lines are skipped; a trailing '\r' is
/// stripped. Rows with a field count different from the header are rejected.
Table read(std::istream& in);
Table read_file(const std::string& path);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

/// Fixed-point formatting with `decimals` digits (display tables).
std::string format_fixed(double v, int decimals);

std::int64_t parse_int(const std::string& field, std::size_t line, std::string_view column);
double parse_double(const std::string& field, std::size_t line, std::string_view column);

}  // namespace citedyn::csv
