#pragma once

#include <optional>
#include <string>
#include <vector>

namespace exportscore::csv {

// Comma-delimited, UTF-8, header row mandatory. Missing cells are the empty
// string or the literal NA. Fields containing commas, quotes, or newlines are
// quoted on write; quotes are understood on read.

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t ncols() const { return header.size(); }
  std::size_t nrows() const { return rows.size(); }
  int find(const std::string& name) const;  // -1 when absent
};

// Leading lines starting with '#' are collected as comments and skipped.
Table read_file(const std::string& path);
Table read_string(const std::string& text);

std::string escape_field(const std::string& field);

// Shortest representation that parses back to the same double.
std::string format_double(double v);
// Fixed number of significant decimal digits, for report files.
std::string format_double(double v, int precision);

bool is_missing_token(const std::string& s);
std::optional<double> parse_double(const std::string& s);  // nullopt on garbage
std::optional<long long> parse_int(const std::string& s);

void write_file(const std::string& path, const std::vector<std::string>& comment_lines,
                const Table& table);

}  // namespace exportscore::csv
