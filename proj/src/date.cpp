#include "factorbt/date.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "factorbt/error.hpp"

namespace factorbt {

namespace {

int parse_int(std::string_view text, std::string_view whole) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ParseError, "invalid date '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Date Date::from_iso(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw Error(ErrorCode::ParseError, "invalid date '" + std::string(text) + "'");
  }
  const int y = parse_int(text.substr(0, 4), text);
  const int m = parse_int(text.substr(5, 2), text);
  const int d = parse_int(text.substr(8, 2), text);
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw Error(ErrorCode::ParseError, "invalid date '" + std::string(text) + "'");
  }
  return Date{static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count())};
}

std::string Date::to_iso() const {
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

int Date::weekday() const {
  // 1970-01-01 was a Thursday.
  const int w = (days + 3) % 7;
  return w < 0 ? w + 7 : w;
}

Date next_business_day(Date d) {
  Date next{d.days + 1};
  while (next.weekday() >= 5) {
    ++next.days;
  }
  return next;
}

}  // namespace factorbt
