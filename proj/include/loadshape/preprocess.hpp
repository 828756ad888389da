#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "loadshape/types.hpp"

namespace loadshape {

// Days with mean hourly demand below this (kW) are dropped; the boundary
// itself is retained.
inline constexpr double kLowDemandKw = 0.2;
inline constexpr double kUnitSumTolerance = 1e-9;
inline constexpr const char* kSubsampleAlgorithm = "partial-fisher-yates/mt19937_64";

struct CleaningReport {
  std::size_t input = 0;
  std::size_t dropped_missing_hours = 0;
  std::size_t dropped_low_demand = 0;
  std::size_t dropped_zero_discretionary = 0;
  std::size_t retained = 0;

  std::size_t dropped() const { return dropped_missing_hours + dropped_low_demand + dropped_zero_discretionary; }
  double retention_fraction() const {
    return input == 0 ? 0.0 : static_cast<double>(retained) / static_cast<double>(input);
  }
};

struct CleanResult {
  std::vector<LoadDay> days;
  CleaningReport report;
};

// Drops days with a missing hour (checked first) or mean demand < 0.2 kW.
CleanResult clean(const std::vector<LoadDay>& days);

// kwh[t] - min_u kwh[u]. Requires a complete day (throws InvalidArgument).
HourlyProfile demin(const LoadDay& day);
HourlyProfile demin(const HourlyProfile& kwh);

// Divides by the total. Throws ZeroDiscretionaryError when the total is 0.
ShapeVector normalize(const HourlyProfile& deminned, DayKey source = {}, double day_total_kwh = 0.0);

struct ShapeResult {
  std::vector<ShapeVector> shapes;
  CleaningReport report;
};

// clean -> demin -> normalize over a corpus, tallying flat days as
// zero-discretionary drops. Output order follows input order.
ShapeResult build_shapes(const std::vector<LoadDay>& days);

// Uniform sample without replacement, returned in original order.
// Throws InvalidArgument when n exceeds the population.
std::vector<ShapeVector> subsample(const std::vector<ShapeVector>& shapes, std::size_t n, std::uint64_t seed);
std::vector<std::size_t> subsample_indices(std::size_t population, std::size_t n, std::uint64_t seed);

// shapes.csv: household_id,date,day_total_kwh,discretionary_kwh,v1..v24
void write_shapes(const std::filesystem::path& path, const std::vector<ShapeVector>& shapes);
std::vector<ShapeVector> read_shapes(const std::filesystem::path& path);

// cleaning_report.csv: one rule,count row per tally.
void write_cleaning_report(const std::filesystem::path& path, const CleaningReport& report);
CleaningReport read_cleaning_report(const std::filesystem::path& path);

}  // namespace loadshape
