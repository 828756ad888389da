#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace loadshape {

// Naive local calendar date. No time zone or DST handling.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days day) : day_(day) {}
  Date(int year, unsigned month, unsigned day);

  // Strict ISO-8601 "YYYY-MM-DD"; nullopt on anything else.
  static std::optional<Date> parse(std::string_view text);

  std::string iso() const;
  std::chrono::sys_days sys_days() const { return day_; }
  std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{day_}; }
  unsigned month() const;
  // 1-based day of the year.
  int day_of_year() const;
  Date plus_days(int n) const { return Date{day_ + std::chrono::days{n}}; }

  friend bool operator==(const Date&, const Date&) = default;
  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days day_{};
};

enum class Season { kSummer, kAutumn, kWinter, kSpring };
enum class DayType { kWeekday, kWeekend };

std::string_view season_name(Season season);
std::string_view day_type_name(DayType type);

// Meteorological seasons: Jun-Aug summer, Sep-Nov autumn, Dec-Feb winter,
// Mar-May spring.
Season season_of(const Date& date);
// Saturday and Sunday are weekend days; holidays are not special-cased.
DayType day_type_of(const Date& date);

}  // namespace loadshape
