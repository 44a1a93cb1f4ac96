#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace factorbt::csv {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Parses a decimal field; an empty field yields NaN. Throws ParseError.
double parse_double(std::string_view field);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

/// Rows of a CSV file without the header; the header must equal `header`.
/// Throws IoError if the file cannot be read, ParseError on a bad header.
std::vector<std::vector<std::string>> read_file(const std::filesystem::path& path, std::string_view header);

/// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace factorbt::csv
