#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sqg {

/// Throws IoError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place, so
/// readers never observe a partially written file.
void write_file(const std::filesystem::path& path, std::string_view content);

/// Appends one line and flushes before returning.
void append_line(const std::filesystem::path& path, std::string_view line);

std::string utc_timestamp();

/// 64-bit FNV-1a, stable across platforms and runs.
std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t value);

struct CsvRow {
  std::size_t line = 0;  // line on which the row starts
  std::vector<std::string> cells;
};

/// RFC 4180 reader: quoted cells may contain commas, doubled quotes and
/// newlines. Throws ParseError on an unterminated quote.
std::vector<CsvRow> parse_csv(std::string_view content);

std::string csv_escape(std::string_view cell);

/// Fixed-precision decimal rendering that does not depend on the locale.
std::string format_fixed(double value, int decimals);

}  // namespace sqg
