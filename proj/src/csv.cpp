#include "factorbt/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "factorbt/error.hpp"

namespace factorbt::csv {

std::string format_double(double v) {
  if (std::isnan(v)) {
    return "";
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) {
    throw Error(ErrorCode::IoError, "cannot format value");
  }
  return std::string(buf, ptr);
}

double parse_double(std::string_view field) {
  while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  while (!field.empty() && field.front() == ' ') {
    field.remove_prefix(1);
  }
  if (field.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::ParseError, "not a number: '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::vector<std::vector<std::string>> read_file(const std::filesystem::path& path, std::string_view header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::ParseError, path.string() + " is empty");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  if (line != header) {
    throw Error(ErrorCode::ParseError,
                path.string() + ": expected header '" + std::string(header) + "', got '" + line + "'");
  }
  const std::size_t columns = split(header).size();
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto fields = split(line);
    if (fields.size() != columns) {
      throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                             std::to_string(columns) + " fields");
    }
    rows.emplace_back(fields.begin(), fields.end());
  }
  return rows;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw Error(ErrorCode::IoError, "cannot create " + path.parent_path().string());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot write " + path.string());
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw Error(ErrorCode::IoError, "write failed for " + path.string());
  }
}

}  // namespace factorbt::csv
