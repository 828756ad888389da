#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "loadshape/calendar.hpp"

namespace loadshape {

inline constexpr std::size_t kHoursPerDay = 24;

// One value per clock hour; index h covers [h, h+1) local time, so index 0 is
// midnight to 1am. Files number the same slots 1..24.
using HourlyProfile = std::array<double, kHoursPerDay>;

// A raw hourly reading. std::nullopt marks a missing or unparseable cell; it
// is never silently replaced by zero.
using HourlyReadings = std::array<std::optional<double>, kHoursPerDay>;

struct DayKey {
  std::string household_id;
  Date date;

  friend bool operator==(const DayKey&, const DayKey&) = default;
  friend auto operator<=>(const DayKey&, const DayKey&) = default;
};

struct LoadDay {
  DayKey key;
  HourlyReadings kwh;

  bool complete() const;
  friend bool operator==(const LoadDay&, const LoadDay&) = default;
};

struct WeatherDay {
  Date date;
  double avg_temp_f = 0.0;

  friend bool operator==(const WeatherDay&, const WeatherDay&) = default;
};

enum class Indicator {
  kLowIncome,
  kChronicallyIll,
  kElderly,
  kChildrenInHome,
  kCollegeDegree,
  kWorkFullTime,
  kWorkFromHome,
  kSingleFamilyHome,
  kElectricDryer,
  kCentralAc,
  kRoomAc,
  kProgrammableThermostat,
};

inline constexpr std::size_t kIndicatorCount = 12;

const std::array<Indicator, kIndicatorCount>& all_indicators();
std::string_view indicator_name(Indicator indicator);
std::optional<Indicator> parse_indicator(std::string_view name);
// Comma separated list of the closed vocabulary, for diagnostics.
std::string indicator_vocabulary();

struct HouseholdProfile {
  std::string household_id;
  // nullopt = unknown (blank survey cell).
  std::array<std::optional<bool>, kIndicatorCount> indicators{};

  std::optional<bool> get(Indicator indicator) const {
    return indicators[static_cast<std::size_t>(indicator)];
  }
  void set(Indicator indicator, std::optional<bool> value) {
    indicators[static_cast<std::size_t>(indicator)] = value;
  }

  friend bool operator==(const HouseholdProfile&, const HouseholdProfile&) = default;
};

// De-minned, unit-sum daily profile: the object that gets clustered.
struct ShapeVector {
  HourlyProfile values{};
  DayKey source;
  double day_total_kwh = 0.0;
  double discretionary_kwh = 0.0;
};

}  // namespace loadshape
