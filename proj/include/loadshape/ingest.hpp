#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "loadshape/types.hpp"

namespace loadshape {

// A row-level problem that did not abort the read. line is 1-based and counts
// the header.
struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

enum class MeterSchema { kWide, kLong };

struct MeterCorpus {
  // In order of first appearance in the file.
  std::vector<LoadDay> days;
  std::vector<Diagnostic> diagnostics;
};

struct WeatherCorpus {
  std::vector<WeatherDay> days;
  std::vector<Diagnostic> diagnostics;
};

struct SurveyCorpus {
  std::vector<HouseholdProfile> households;
  std::vector<Diagnostic> diagnostics;
};

// Wide:  household_id,date,h1,...,h24
// Long:  household_id,date,hour,kwh   (hour 1..24)
// Malformed or negative cells become missing slots with a diagnostic; rows
// with the wrong arity or a bad date are rejected. Throws IoError,
// FormatError (header), DuplicateKeyError.
MeterCorpus read_meter_corpus(const std::filesystem::path& path, MeterSchema schema);
void write_meter_corpus(const std::filesystem::path& path, const std::vector<LoadDay>& days, MeterSchema schema);

// date,avg_temp_f. An empty file yields an empty corpus plus a warning
// diagnostic. Duplicate dates throw DuplicateKeyError.
WeatherCorpus read_weather(const std::filesystem::path& path);
void write_weather(const std::filesystem::path& path, const std::vector<WeatherDay>& days);

// household_id followed by any subset of the indicator vocabulary. Cells are
// 1, 0 or blank (unknown).
SurveyCorpus read_survey(const std::filesystem::path& path);
void write_survey(const std::filesystem::path& path, const std::vector<HouseholdProfile>& households);

}  // namespace loadshape
