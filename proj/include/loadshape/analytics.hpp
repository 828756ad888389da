#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loadshape/types.hpp"

namespace loadshape {

// Natural-log Shannon entropy, -sum p log p, with 0 log 0 = 0. Throws
// NotADistributionError when the entries do not sum to 1 within 1e-6 or one
// is negative.
double entropy(std::span<const double> p);
// Entropy of the empirical distribution given by counts. Throws
// EmptyInputError when all counts are zero.
double entropy_of_counts(std::span<const std::size_t> counts);

// One assigned household-day with the attributes strata may look at.
struct AssignedDay {
  DayKey key;
  std::size_t shape_id = 0;
  double day_total_kwh = 0.0;
  double discretionary_kwh = 0.0;
  std::optional<double> avg_temp_f;
};

struct Stratum {
  // Strata sharing an axis must partition the records they are given.
  std::string axis;
  std::string label;
  std::function<bool(const AssignedDay&)> predicate;
};

struct StratumEntropy {
  std::string axis;
  std::string label;
  std::size_t days = 0;
  // nullopt for an empty stratum: undefined, not zero.
  std::optional<double> entropy;
  // p_c for c in [0, dictionary_size).
  std::vector<double> frequencies;
};

using EntropyReport = std::vector<StratumEntropy>;

// Throws InvalidArgument when a record matches zero or several strata of one
// axis, or a record's shape id is outside the dictionary.
EntropyReport stratified_entropy(std::span<const AssignedDay> records, std::span<const Stratum> strata,
                                 std::size_t dictionary_size);

std::vector<Stratum> season_strata();
std::vector<Stratum> day_type_strata();

// Three ascending cut points; bin k holds boundaries[k-1] <= t < boundaries[k].
struct TemperatureBins {
  std::array<double, 3> boundaries{};
  bool empirical = false;

  std::size_t bin(double temp_f) const;
};

// Empirical quartile cut points of the given summer daily temperatures: with
// x sorted, b_k = x[floor(k n / 4)]. Throws InvalidArgument for fewer than 4
// distinct values.
TemperatureBins temperature_quartiles(std::span<const double> summer_temps_f);
// Throws InvalidArgument unless strictly increasing.
TemperatureBins fixed_temperature_bins(double b1, double b2, double b3);
// Summer daily temperatures of the weather table, in date order.
std::vector<double> summer_temperatures(std::span<const WeatherDay> weather);
// Strata T1..T4 on the "temperature" axis. Records need avg_temp_f.
std::vector<Stratum> temperature_strata(const TemperatureBins& bins);

// Per-household entropy over the records passing the filter (all records
// when the filter is empty). Households without a matching day are absent.
std::map<std::string, double> household_entropy(std::span<const AssignedDay> records, std::size_t dictionary_size,
                                                const std::function<bool(const AssignedDay&)>& filter = {});

struct BootstrapOptions {
  std::size_t resamples = 10000;
  std::uint64_t seed = 1;
  double confidence = 0.95;
};

struct CharacteristicDelta {
  Indicator indicator{};
  std::size_t n_with = 0;
  std::size_t n_without = 0;
  // mean(with) - mean(without)
  double delta = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Percentile bootstrap over households, resampling each group with
// replacement at its own size. Households with an unknown indicator value or
// no profile are left out. Throws InvalidArgument when no household has a
// known value, or either group has fewer than 2 households.
CharacteristicDelta characteristic_entropy_delta(const std::map<std::string, double>& entropies,
                                                 std::span<const HouseholdProfile> profiles, Indicator indicator,
                                                 const BootstrapOptions& options = {});

// Mean over clusters of max_{j != i} (s_i + s_j) / d(C_i, C_j), with s the
// mean Euclidean distance of members to their centroid. Throws
// InvalidArgument for fewer than 2 clusters, an empty cluster, or coincident
// centroids (the message names the pair).
double davies_bouldin(std::span<const HourlyProfile> points, std::span<const std::size_t> labels,
                      std::span<const HourlyProfile> centroids);

struct CoverageEntry {
  std::size_t rank = 0;
  std::size_t shape_id = 0;
  double kwh = 0.0;
  double fraction = 0.0;
  double cumulative = 0.0;
};

// Clusters sorted by kWh descending (ties: lower id), with cumulative shares.
// The total is summed in that same order, so the last cumulative value is 1.
// Throws InvalidArgument when the total is 0 or a weight is negative.
std::vector<CoverageEntry> coverage_curve(std::span<const std::size_t> shape_ids, std::span<const double> kwh,
                                          std::size_t dictionary_size);

enum class PeakBin { kNight, kMorning, kDaytime, kTou, kEvening };
std::string_view peak_bin_name(PeakBin bin);
// Clock-hour bins: night 23-6, morning 6-10, daytime 10-16, tou 16-19,
// evening 19-23, each left-closed.
PeakBin peak_bin_of(std::size_t hour);

struct PeakOptions {
  double min_prominence_fraction = 0.25;
  std::size_t min_separation_hours = 3;
};

struct ShapeTaxonomy {
  std::size_t shape_id = 0;
  // 1, 2, or 3 for "3+".
  std::size_t peak_count = 0;
  std::size_t primary_hour = 0;
  PeakBin primary_bin{};
  // Accepted peaks, highest first.
  std::vector<std::size_t> peak_hours;
};

// Local maxima on the circular day (plateaus count once, at their first
// hour) whose topographic prominence reaches the given share of the shape's
// maximum, thinned greedily by height (ties: earlier hour) to the minimum
// separation. A flat shape gets one peak at hour 0.
ShapeTaxonomy classify_peaks(const HourlyProfile& shape, const PeakOptions& options = {});
std::vector<ShapeTaxonomy> peak_taxonomy(std::span<const HourlyProfile> centers, const PeakOptions& options = {});

struct OccurrenceMap {
  // Sorted by row sum descending, then id.
  std::vector<std::string> households;
  std::vector<Date> dates;
  // cells[h][d]: 1 assigned to a target shape, 0 otherwise, -1 no record.
  std::vector<std::vector<std::int8_t>> cells;
  std::vector<std::size_t> row_sums;
  // Share of recorded households on that day assigned to a target shape.
  std::vector<double> day_share;
  std::vector<std::optional<double>> day_mean_temp_f;
  // Entropy with the calendar day as the stratum.
  std::vector<double> day_entropy;
};

// Throws InvalidArgument for an empty target set or an id outside the
// dictionary.
OccurrenceMap occurrence_map(std::span<const AssignedDay> records, const std::vector<std::size_t>& targets,
                             std::span<const WeatherDay> weather, std::size_t dictionary_size);

// Sample Pearson correlation; nan when either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

// "# key=value,key=value" line written first in every analytics CSV.
using Provenance = std::map<std::string, std::string>;
std::string provenance_line(const Provenance& provenance);

void write_entropy_report(const std::filesystem::path& path, const EntropyReport& report, const Provenance& provenance);
void write_coverage_curve(const std::filesystem::path& path, std::span<const CoverageEntry> curve,
                          const Provenance& provenance);
void write_taxonomy(const std::filesystem::path& path, std::span<const ShapeTaxonomy> taxonomy,
                    const Provenance& provenance);
void write_household_entropy(const std::filesystem::path& path, const std::map<std::string, double>& entropies,
                             const std::map<std::string, std::size_t>& day_counts, const Provenance& provenance);
void write_characteristic_deltas(const std::filesystem::path& path, std::span<const CharacteristicDelta> deltas,
                                 const Provenance& provenance);
void write_occurrence_map(const std::filesystem::path& path, const OccurrenceMap& map, const Provenance& provenance);

// Data lines of a CSV written above, skipping the provenance line.
std::vector<std::string> read_data_lines(const std::filesystem::path& path);

}  // namespace loadshape
