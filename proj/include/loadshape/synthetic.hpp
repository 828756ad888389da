#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "loadshape/types.hpp"

namespace loadshape {

// One planted bump of an archetype: clock hour and relative weight.
struct ArchetypePeak {
  int hour = 0;
  double weight = 1.0;
};

// Generator configuration. Every field maps to a key in the flat key=value
// config file (see to_key_values / synthetic_spec_from_key_values).
struct SyntheticSpec {
  std::size_t archetypes = 5;
  std::size_t households = 500;
  Date start_date{2011, 6, 1};
  std::size_t days = 365;

  // Per-hour standard deviation of the additive shape noise, in unit-sum
  // shape units.
  double noise_level = 0.004;
  // Outlier days add an unplanned activity bump at a random hour:
  // (1 - w) * archetype + w * bump, w ~ U(min, max). With w < 0.5 the day
  // stays nearest to its own archetype while its RSE exceeds typical theta.
  double outlier_fraction = 0.0;
  double outlier_weight_min = 0.42;
  double outlier_weight_max = 0.48;

  // Hot days shift mixture mass towards the cooling archetype: weight
  // response * clamp((T - threshold) / span, 0, 1).
  double temperature_response = 0.0;
  std::size_t cooling_archetype = 0;
  double cooling_threshold_f = 65.0;
  double cooling_span_f = 25.0;

  // Household baseline mixture entropy (nats) ~ U(min, max), plus a bias per
  // indicator the household has.
  double entropy_min = 0.5;
  double entropy_max = 1.0;
  std::array<double, kIndicatorCount> entropy_bias{};
  double indicator_prevalence = 0.5;
  // Probability that a survey cell is left blank.
  double survey_missing_fraction = 0.0;

  // Days damaged after generation: half lose one hour, half become low demand.
  double bad_day_fraction = 0.0;

  double baseload_min_kw = 0.25;
  double baseload_max_kw = 0.8;
  double discretionary_min_kwh = 6.0;
  double discretionary_max_kwh = 30.0;

  double temp_mean_f = 62.0;
  double temp_amplitude_f = 16.0;
  double temp_noise_f = 5.0;
  int temp_peak_day = 205;

  std::uint64_t seed = 1;

  // Empty selects the built-in table.
  std::vector<std::vector<ArchetypePeak>> archetype_peaks;
};

struct TruthRecord {
  DayKey key;
  std::size_t archetype = 0;
};

struct SyntheticCorpus {
  std::vector<LoadDay> meter;
  std::vector<WeatherDay> weather;
  std::vector<HouseholdProfile> survey;
  std::vector<TruthRecord> truth;
  // Unit-sum archetype shapes in id order.
  std::vector<HourlyProfile> archetypes;
  // Planted peak structure per archetype, for taxonomy checks.
  std::vector<std::vector<ArchetypePeak>> archetype_peaks;
  // Ground truth per household (same order as survey): the household's
  // mixture entropy before temperature modulation, and its indicators.
  std::vector<double> household_entropy;
  std::vector<HouseholdProfile> household_truth;
};

// Throws InvalidArgument for fewer than 2 archetypes or an empty date range.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec);

SyntheticSpec synthetic_spec_from_key_values(const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> to_key_values(const SyntheticSpec& spec);

// meter.csv (wide), weather.csv, survey.csv, truth.csv into dir.
void write_synthetic(const std::filesystem::path& dir, const SyntheticCorpus& corpus);
std::vector<TruthRecord> read_truth(const std::filesystem::path& path);

// Built-in archetype peak table extended to k entries.
std::vector<std::vector<ArchetypePeak>> default_archetype_peaks(std::size_t k);
// Sum of circular Gaussian bumps (1 h standard deviation), normalized to sum 1.
HourlyProfile build_archetype(const std::vector<ArchetypePeak>& peaks);

// Mixture over k categories with the given entropy: p ~ exp(-beta * rank)
// in the given category order, beta found by bisection.
std::vector<double> mixture_with_entropy(double entropy, const std::vector<std::size_t>& order);

}  // namespace loadshape
