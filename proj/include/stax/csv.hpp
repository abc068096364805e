#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stax::csv {

// Shortest-roundtrip-safe decimal (17 significant digits).
std::string format_double(double value);

std::vector<std::string> split(std::string_view line, char delimiter);
std::string_view trim(std::string_view text);

// Strict parsers: the whole field must be consumed.
double parse_double(std::string_view field);
long long parse_int(std::string_view field);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;  // throws if absent
};

Table read_table(const std::filesystem::path& path);

// Writes to `path.tmp` then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace stax::csv
