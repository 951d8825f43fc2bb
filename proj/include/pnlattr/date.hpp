#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "pnlattr/error.hpp"

namespace pnlattr {

using Date = std::chrono::year_month_day;

inline std::chrono::sys_days to_days(Date d) { return std::chrono::sys_days{d}; }

inline Date make_date(int y, unsigned m, unsigned d) {
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  require(date.ok(), ErrorKind::InvalidArgument, "invalid calendar date");
  return date;
}

/// ACT/365F year fraction from `from` to `to` (negative when `to` precedes `from`).
inline double year_fraction(Date from, Date to) {
  return static_cast<double>((to_days(to) - to_days(from)).count()) / 365.0;
}

inline Date add_days(Date d, int days) { return Date{to_days(d) + std::chrono::days{days}}; }

/// Calendar month shift; the day is clamped to the end of the target month.
inline Date add_months(Date d, int months) {
  Date shifted = d.year() / d.month() / std::chrono::day{1} + std::chrono::months{months};
  auto last = std::chrono::year_month_day_last{shifted.year(), std::chrono::month_day_last{shifted.month()}};
  std::chrono::day day = d.day() > last.day() ? last.day() : d.day();
  return Date{shifted.year(), shifted.month(), day};
}

/// Strict ISO-8601 `YYYY-MM-DD`.
inline Date parse_date(std::string_view text) {
  auto bad = [&] { fail(ErrorKind::ParseError, "invalid date '" + std::string(text) + "'"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') bad();
  int y = 0;
  unsigned m = 0, d = 0;
  auto field = [&](std::size_t pos, std::size_t len, auto& out) {
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    if (ec != std::errc{} || ptr != text.data() + pos + len) bad();
  };
  field(0, 4, y);
  field(5, 2, m);
  field(8, 2, d);
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) bad();
  return date;
}

inline std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

}  // namespace pnlattr
