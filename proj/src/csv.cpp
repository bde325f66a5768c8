#include "mzisim/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mzisim/errors.hpp"

namespace mzisim::csv {
namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::optional<std::size_t> Table::column(std::string_view name) const {
  const auto key = lower(std::string(name));
  for (std::size_t i = 0; i < header.size(); ++i)
    if (lower(header[i]) == key) return i;
  return std::nullopt;
}

std::size_t Table::require_column(std::string_view name) const {
  if (auto c = column(name)) return *c;
  throw DataFormatError("missing required column '" + std::string(name) + "'", 1);
}

Table read(std::istream& in) {
  Table t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    auto fields = split(s);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw DataFormatError("expected " + std::to_string(t.header.size()) + " fields, got " +
                                std::to_string(fields.size()),
                            lineno);
    t.rows.push_back({lineno, std::move(fields)});
  }
  if (!have_header) throw DataFormatError("empty CSV: no header row");
  return t;
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read(in);
}

double to_double(const Row& row, std::size_t column) {
  const auto& f = row.fields.at(column);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty())
    throw DataFormatError("not a number: '" + f + "'", row.line);
  return v;
}

long long to_integer(const Row& row, std::size_t column) {
  const auto& f = row.fields.at(column);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty())
    throw DataFormatError("not an integer: '" + f + "'", row.line);
  return v;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace mzisim::csv
