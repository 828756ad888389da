#include "loadshape/ingest.hpp"

#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "loadshape/csv.hpp"
#include "loadshape/error.hpp"

namespace loadshape {

namespace {

std::string wide_header() {
  std::string h = "household_id,date";
  for (std::size_t t = 1; t <= kHoursPerDay; ++t) h += ",h" + std::to_string(t);
  return h;
}

constexpr std::string_view kLongHeader = "household_id,date,hour,kwh";
constexpr std::string_view kWeatherHeader = "date,avg_temp_f";

std::string where(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

bool blank(std::string_view line) { return csv::trim(line).empty(); }

// Returns the reading or nullopt (with a diagnostic) for anything that is not
// a finite non-negative number.
std::optional<double> parse_reading(std::string_view cell, std::size_t line, std::size_t hour,
                                    std::vector<Diagnostic>& diagnostics) {
  if (csv::trim(cell).empty()) return std::nullopt;
  const auto value = csv::parse_double(cell);
  if (!value || !std::isfinite(*value) || *value < 0.0) {
    diagnostics.push_back({line, "hour " + std::to_string(hour) + ": invalid reading '" + std::string(cell) +
                                     "', marked missing"});
    return std::nullopt;
  }
  return value;
}

std::string format_reading(const std::optional<double>& value) {
  return value ? csv::format_double(*value) : std::string{};
}

MeterCorpus read_wide(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  MeterCorpus corpus;
  std::map<DayKey, std::size_t> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (blank(lines[i])) continue;
    const auto fields = csv::split(lines[i]);
    if (fields.size() != 2 + kHoursPerDay) {
      corpus.diagnostics.push_back({line, "row rejected: expected 24 hourly columns, found " +
                                              std::to_string(fields.size() < 2 ? 0 : fields.size() - 2)});
      continue;
    }
    const auto id = csv::trim(fields[0]);
    const auto date = Date::parse(csv::trim(fields[1]));
    if (id.empty() || !date) {
      corpus.diagnostics.push_back({line, "row rejected: bad household_id or date"});
      continue;
    }
    LoadDay day{{std::string(id), *date}, {}};
    for (std::size_t t = 0; t < kHoursPerDay; ++t) {
      day.kwh[t] = parse_reading(fields[2 + t], line, t + 1, corpus.diagnostics);
    }
    if (const auto [it, inserted] = seen.emplace(day.key, line); !inserted) {
      throw DuplicateKeyError(where(path, line) + ": duplicate (household_id, date) " + day.key.household_id + " " +
                              day.key.date.iso() + ", first seen on line " + std::to_string(it->second));
    }
    corpus.days.push_back(std::move(day));
  }
  return corpus;
}

MeterCorpus read_long(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  MeterCorpus corpus;
  std::map<DayKey, std::size_t> index;
  std::map<std::pair<DayKey, int>, std::size_t> seen_hours;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (blank(lines[i])) continue;
    const auto fields = csv::split(lines[i]);
    if (fields.size() != 4) {
      corpus.diagnostics.push_back({line, "row rejected: expected 4 columns, found " + std::to_string(fields.size())});
      continue;
    }
    const auto id = csv::trim(fields[0]);
    const auto date = Date::parse(csv::trim(fields[1]));
    const auto hour = csv::parse_int(fields[2]);
    if (id.empty() || !date) {
      corpus.diagnostics.push_back({line, "row rejected: bad household_id or date"});
      continue;
    }
    if (!hour || *hour < 1 || *hour > static_cast<long long>(kHoursPerDay)) {
      corpus.diagnostics.push_back({line, "row rejected: hour must be an integer in 1..24"});
      continue;
    }
    DayKey key{std::string(id), *date};
    if (const auto [it, inserted] = seen_hours.emplace(std::pair{key, static_cast<int>(*hour)}, line); !inserted) {
      throw DuplicateKeyError(where(path, line) + ": duplicate (household_id, date, hour) " + key.household_id + " " +
                              key.date.iso() + " h" + std::to_string(*hour) + ", first seen on line " +
                              std::to_string(it->second));
    }
    auto [it, inserted] = index.emplace(key, corpus.days.size());
    if (inserted) corpus.days.push_back(LoadDay{std::move(key), {}});
    corpus.days[it->second].kwh[static_cast<std::size_t>(*hour - 1)] =
        parse_reading(fields[3], line, static_cast<std::size_t>(*hour), corpus.diagnostics);
  }
  return corpus;
}

void require_header(const std::filesystem::path& path, const std::vector<std::string>& lines,
                    std::string_view expected) {
  if (lines.empty()) throw FormatError(path.string() + ": empty file, expected header '" + std::string(expected) + "'");
  std::string got;
  for (auto f : csv::split(lines[0])) {
    if (!got.empty()) got += ',';
    got += csv::trim(f);
  }
  if (got != expected) {
    throw FormatError(path.string() + ": header mismatch, expected '" + std::string(expected) + "', found '" + got + "'");
  }
}

}  // namespace

MeterCorpus read_meter_corpus(const std::filesystem::path& path, MeterSchema schema) {
  const auto lines = csv::read_lines(path);
  if (schema == MeterSchema::kWide) {
    require_header(path, lines, wide_header());
    return read_wide(path, lines);
  }
  require_header(path, lines, kLongHeader);
  return read_long(path, lines);
}

void write_meter_corpus(const std::filesystem::path& path, const std::vector<LoadDay>& days, MeterSchema schema) {
  std::string out;
  if (schema == MeterSchema::kWide) {
    out += wide_header();
    out += '\n';
    for (const auto& day : days) {
      out += day.key.household_id;
      out += ',';
      out += day.key.date.iso();
      for (const auto& v : day.kwh) {
        out += ',';
        out += format_reading(v);
      }
      out += '\n';
    }
  } else {
    out += kLongHeader;
    out += '\n';
    for (const auto& day : days) {
      const auto prefix = day.key.household_id + "," + day.key.date.iso() + ",";
      for (std::size_t t = 0; t < kHoursPerDay; ++t) {
        out += prefix;
        out += std::to_string(t + 1);
        out += ',';
        out += format_reading(day.kwh[t]);
        out += '\n';
      }
    }
  }
  csv::write_file(path, out);
}

WeatherCorpus read_weather(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  WeatherCorpus corpus;
  if (lines.empty() || (lines.size() == 1 && blank(lines[0]))) {
    corpus.diagnostics.push_back({0, "warning: weather file '" + path.string() + "' is empty"});
    return corpus;
  }
  require_header(path, lines, kWeatherHeader);
  std::map<Date, std::size_t> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (blank(lines[i])) continue;
    const auto fields = csv::split(lines[i]);
    if (fields.size() != 2) {
      corpus.diagnostics.push_back({line, "row rejected: expected 2 columns, found " + std::to_string(fields.size())});
      continue;
    }
    const auto date = Date::parse(csv::trim(fields[0]));
    if (!date) {
      corpus.diagnostics.push_back({line, "row rejected: bad date '" + std::string(fields[0]) + "'"});
      continue;
    }
    const auto temp = csv::parse_double(fields[1]);
    if (!temp || !std::isfinite(*temp)) {
      corpus.diagnostics.push_back({line, "row rejected: non-numeric temperature '" + std::string(fields[1]) + "'"});
      continue;
    }
    if (const auto [it, inserted] = seen.emplace(*date, line); !inserted) {
      throw DuplicateKeyError(where(path, line) + ": duplicate weather date " + date->iso() +
                              ", first seen on line " + std::to_string(it->second));
    }
    corpus.days.push_back({*date, *temp});
  }
  return corpus;
}

void write_weather(const std::filesystem::path& path, const std::vector<WeatherDay>& days) {
  std::string out{kWeatherHeader};
  out += '\n';
  for (const auto& d : days) {
    out += d.date.iso();
    out += ',';
    out += csv::format_double(d.avg_temp_f);
    out += '\n';
  }
  csv::write_file(path, out);
}

SurveyCorpus read_survey(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw FormatError(path.string() + ": empty survey file, expected a header row");
  const auto header = csv::split(lines[0]);
  if (header.empty() || csv::trim(header[0]) != "household_id") {
    throw FormatError(path.string() + ": first survey column must be household_id");
  }
  std::vector<Indicator> columns;
  std::set<Indicator> distinct;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto name = csv::trim(header[c]);
    const auto indicator = parse_indicator(name);
    if (!indicator) {
      throw FormatError(path.string() + ": unknown survey indicator column '" + std::string(name) +
                        "'; allowed: " + indicator_vocabulary());
    }
    if (!distinct.insert(*indicator).second) {
      throw FormatError(path.string() + ": survey column '" + std::string(name) + "' appears twice");
    }
    columns.push_back(*indicator);
  }

  SurveyCorpus corpus;
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line = i + 1;
    if (blank(lines[i])) continue;
    const auto fields = csv::split(lines[i]);
    if (fields.size() != header.size()) {
      corpus.diagnostics.push_back({line, "row rejected: expected " + std::to_string(header.size()) +
                                              " columns, found " + std::to_string(fields.size())});
      continue;
    }
    HouseholdProfile profile;
    profile.household_id = std::string(csv::trim(fields[0]));
    if (profile.household_id.empty()) {
      corpus.diagnostics.push_back({line, "row rejected: empty household_id"});
      continue;
    }
    bool ok = true;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto cell = csv::trim(fields[c + 1]);
      if (cell.empty()) continue;
      if (cell == "1") {
        profile.set(columns[c], true);
      } else if (cell == "0") {
        profile.set(columns[c], false);
      } else {
        corpus.diagnostics.push_back({line, "row rejected: indicator " + std::string(indicator_name(columns[c])) +
                                                " must be 0, 1 or blank, found '" + std::string(cell) + "'"});
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (const auto [it, inserted] = seen.emplace(profile.household_id, line); !inserted) {
      throw DuplicateKeyError(where(path, line) + ": duplicate household_id " + profile.household_id +
                              ", first seen on line " + std::to_string(it->second));
    }
    corpus.households.push_back(std::move(profile));
  }
  return corpus;
}

void write_survey(const std::filesystem::path& path, const std::vector<HouseholdProfile>& households) {
  std::string out = "household_id";
  for (auto ind : all_indicators()) {
    out += ',';
    out += indicator_name(ind);
  }
  out += '\n';
  for (const auto& h : households) {
    out += h.household_id;
    for (auto ind : all_indicators()) {
      out += ',';
      if (const auto v = h.get(ind)) out += *v ? '1' : '0';
    }
    out += '\n';
  }
  csv::write_file(path, out);
}

}  // namespace loadshape
