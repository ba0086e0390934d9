#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace puprior::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name` in the header, or -1.
  [[nodiscard]] int column(std::string_view name) const;
};

/// Reads a delimited text file with a header row. Lines starting with '#'
/// are metadata and skipped. Double-quoted fields may contain the delimiter.
Table read(const std::filesystem::path& path, char delimiter = ',');
Table parse(std::istream& in, char delimiter = ',');

/// Shortest representation that round-trips through `std::from_chars`.
std::string format_number(double value);

/// Parses a full field as a finite or non-finite double; returns false on
/// trailing garbage or an empty field.
bool parse_number(std::string_view text, double& out);

}  // namespace puprior::csv
