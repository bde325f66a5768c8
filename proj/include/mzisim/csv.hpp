#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mzisim::csv {

/// One parsed data row, remembering where it came from for diagnostics.
struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Header-first comma separated table. Blank lines and `#` comments are skipped.
struct Table {
  std::vector<std::string> header;
  std::vector<Row> rows;

  /// Column index by (case-insensitive, trimmed) name.
  std::optional<std::size_t> column(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
};

Table read(std::istream& in);
Table read_file(const std::filesystem::path& path);

/// Parses a full-field double; throws DataFormatError naming the line.
double to_double(const Row& row, std::size_t column);
long long to_integer(const Row& row, std::size_t column);

/// Shortest round-trippable text for a double.
std::string format_double(double v);

}  // namespace mzisim::csv
