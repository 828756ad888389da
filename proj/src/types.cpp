#include "loadshape/types.hpp"

#include <algorithm>

namespace loadshape {

bool LoadDay::complete() const {
  return std::all_of(kwh.begin(), kwh.end(), [](const auto& v) { return v.has_value(); });
}

namespace {

constexpr std::array<std::string_view, kIndicatorCount> kIndicatorNames = {
    "low_income",       "chronically_ill", "elderly",        "children_in_home",
    "college_degree",   "work_full_time",  "work_from_home", "single_family_home",
    "electric_dryer",   "central_ac",      "room_ac",        "programmable_thermostat",
};

}  // namespace

const std::array<Indicator, kIndicatorCount>& all_indicators() {
  static const std::array<Indicator, kIndicatorCount> all = {
      Indicator::kLowIncome,      Indicator::kChronicallyIll, Indicator::kElderly,
      Indicator::kChildrenInHome, Indicator::kCollegeDegree,  Indicator::kWorkFullTime,
      Indicator::kWorkFromHome,   Indicator::kSingleFamilyHome, Indicator::kElectricDryer,
      Indicator::kCentralAc,      Indicator::kRoomAc,         Indicator::kProgrammableThermostat,
  };
  return all;
}

std::string_view indicator_name(Indicator indicator) {
  return kIndicatorNames[static_cast<std::size_t>(indicator)];
}

std::optional<Indicator> parse_indicator(std::string_view name) {
  for (std::size_t i = 0; i < kIndicatorNames.size(); ++i) {
    if (kIndicatorNames[i] == name) return static_cast<Indicator>(i);
  }
  return std::nullopt;
}

std::string indicator_vocabulary() {
  std::string out;
  for (auto name : kIndicatorNames) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

}  // namespace loadshape
