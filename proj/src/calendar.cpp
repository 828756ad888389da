#include "loadshape/calendar.hpp"

#include <charconv>
#include <cstdio>

namespace loadshape {

namespace {

bool parse_digits(std::string_view text, int& out) {
  if (text.empty()) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day)
    : day_(std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day}) {}

std::optional<Date> Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_digits(text.substr(0, 4), y) || !parse_digits(text.substr(5, 2), m) ||
      !parse_digits(text.substr(8, 2), d)) {
    return std::nullopt;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{std::chrono::sys_days{ymd}};
}

std::string Date::iso() const {
  const auto d = ymd();
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

unsigned Date::month() const { return static_cast<unsigned>(ymd().month()); }

int Date::day_of_year() const {
  const auto d = ymd();
  const std::chrono::sys_days jan1{d.year() / std::chrono::January / 1};
  return static_cast<int>((day_ - jan1).count()) + 1;
}

std::string_view season_name(Season season) {
  switch (season) {
    case Season::kSummer: return "summer";
    case Season::kAutumn: return "autumn";
    case Season::kWinter: return "winter";
    case Season::kSpring: return "spring";
  }
  return "?";
}

std::string_view day_type_name(DayType type) {
  return type == DayType::kWeekday ? "weekday" : "weekend";
}

Season season_of(const Date& date) {
  switch (date.month()) {
    case 6: case 7: case 8: return Season::kSummer;
    case 9: case 10: case 11: return Season::kAutumn;
    case 12: case 1: case 2: return Season::kWinter;
    default: return Season::kSpring;
  }
}

DayType day_type_of(const Date& date) {
  const std::chrono::weekday wd{date.sys_days()};
  return (wd == std::chrono::Saturday || wd == std::chrono::Sunday) ? DayType::kWeekend : DayType::kWeekday;
}

}  // namespace loadshape
