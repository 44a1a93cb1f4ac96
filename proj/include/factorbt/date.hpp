#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace factorbt {

/// Calendar day stored as a count of days since 1970-01-01.
/// ISO-8601 (`YYYY-MM-DD`) is the only textual form.
struct Date {
  std::int32_t days = 0;

  static Date from_iso(std::string_view text);
  std::string to_iso() const;

  /// 0 = Monday ... 6 = Sunday.
  int weekday() const;

  friend auto operator<=>(const Date&, const Date&) = default;
};

/// Next Monday-to-Friday day strictly after `d`.
Date next_business_day(Date d);

}  // namespace factorbt
