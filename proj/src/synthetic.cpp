#include "loadshape/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "loadshape/csv.hpp"
#include "loadshape/error.hpp"
#include "loadshape/ingest.hpp"
#include "loadshape/random.hpp"

namespace loadshape {

namespace {

constexpr std::uint64_t kWeatherStream = 1ULL << 40;

double entropy_of(const std::vector<double>& p) {
  double s = 0.0;
  for (double v : p) {
    if (v > 0.0) s -= v * std::log(v);
  }
  return s;
}

std::vector<double> geometric_mixture(double beta, const std::vector<std::size_t>& order) {
  std::vector<double> p(order.size());
  double total = 0.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const double w = std::exp(-beta * static_cast<double>(rank));
    p[order[rank]] = w;
    total += w;
  }
  for (double& v : p) v /= total;
  return p;
}

std::size_t draw_category(const std::vector<double>& p, Rng& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    acc += p[k];
    if (u < acc) return k;
  }
  return p.size() - 1;
}

std::string household_id(std::size_t index) {
  std::string digits = std::to_string(index + 1);
  if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
  return "H" + digits;
}

double get_double(const std::map<std::string, std::string>& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  const auto v = csv::parse_double(it->second);
  if (!v) throw InvalidArgument("synthetic config: '" + key + "' must be a number, got '" + it->second + "'");
  return *v;
}

long long get_int(const std::map<std::string, std::string>& kv, const std::string& key, long long fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  const auto v = csv::parse_int(it->second);
  if (!v) throw InvalidArgument("synthetic config: '" + key + "' must be an integer, got '" + it->second + "'");
  return *v;
}

std::size_t get_count(const std::map<std::string, std::string>& kv, const std::string& key, std::size_t fallback) {
  const auto v = get_int(kv, key, static_cast<long long>(fallback));
  if (v < 0) throw InvalidArgument("synthetic config: '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<std::vector<ArchetypePeak>> default_archetype_peaks(std::size_t k) {
  // Archetype 0 is the afternoon cooling shape.
  std::vector<std::vector<ArchetypePeak>> table = {
      {{17, 1.0}},
      {{7, 1.0}},
      {{12, 1.0}},
      {{21, 1.0}},
      {{1, 0.4}, {9, 0.6}},
      {{6, 0.3}, {13, 0.3}, {19, 0.4}},
      {{3, 1.0}},
      {{10, 0.5}, {22, 0.5}},
  };
  for (std::size_t i = table.size(); i < k; ++i) {
    table.push_back({{static_cast<int>((5 * i + 2) % kHoursPerDay), 0.55},
                     {static_cast<int>((5 * i + 14) % kHoursPerDay), 0.45}});
  }
  table.resize(k);
  return table;
}

HourlyProfile build_archetype(const std::vector<ArchetypePeak>& peaks) {
  HourlyProfile shape{};
  for (const auto& peak : peaks) {
    HourlyProfile bump{};
    double bump_total = 0.0;
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      const int raw = std::abs(static_cast<int>(h) - peak.hour) % static_cast<int>(kHoursPerDay);
      const double dist = std::min(raw, static_cast<int>(kHoursPerDay) - raw);
      bump[h] = std::exp(-0.5 * dist * dist);
      bump_total += bump[h];
    }
    for (std::size_t h = 0; h < kHoursPerDay; ++h) shape[h] += peak.weight * bump[h] / bump_total;
  }
  const double total = std::accumulate(shape.begin(), shape.end(), 0.0);
  for (double& v : shape) v /= total;
  return shape;
}

std::vector<double> mixture_with_entropy(double entropy, const std::vector<std::size_t>& order) {
  const double max_entropy = std::log(static_cast<double>(order.size()));
  if (entropy >= max_entropy) return geometric_mixture(0.0, order);
  double lo = 0.0;
  double hi = 1.0;
  while (entropy_of(geometric_mixture(hi, order)) > entropy && hi < 1e3) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (entropy_of(geometric_mixture(mid, order)) > entropy) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return geometric_mixture(0.5 * (lo + hi), order);
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec) {
  if (spec.archetypes < 2) throw InvalidArgument("synthetic generator needs at least 2 archetypes");
  if (spec.days == 0) throw InvalidArgument("synthetic generator needs a non-empty date range");
  if (spec.cooling_archetype >= spec.archetypes) throw InvalidArgument("cooling_archetype out of range");
  if (spec.baseload_min_kw < 0.0 || spec.baseload_max_kw < spec.baseload_min_kw) {
    throw InvalidArgument("baseload range invalid");
  }

  SyntheticCorpus corpus;
  corpus.archetype_peaks =
      spec.archetype_peaks.empty() ? default_archetype_peaks(spec.archetypes) : spec.archetype_peaks;
  if (corpus.archetype_peaks.size() != spec.archetypes) {
    throw InvalidArgument("archetype_peaks must list one entry per archetype");
  }
  for (const auto& peaks : corpus.archetype_peaks) corpus.archetypes.push_back(build_archetype(peaks));

  Rng weather_rng(mix_seed(spec.seed, kWeatherStream));
  std::normal_distribution<double> temp_noise(0.0, spec.temp_noise_f);
  corpus.weather.reserve(spec.days);
  for (std::size_t d = 0; d < spec.days; ++d) {
    const Date date = spec.start_date.plus_days(static_cast<int>(d));
    const double phase = 2.0 * std::numbers::pi * (date.day_of_year() - spec.temp_peak_day) / 365.25;
    const double temp = spec.temp_mean_f + spec.temp_amplitude_f * std::cos(phase) + temp_noise(weather_rng);
    corpus.weather.push_back({date, temp});
  }

  const double max_entropy = std::log(static_cast<double>(spec.archetypes));
  corpus.meter.reserve(spec.households * spec.days);
  corpus.truth.reserve(spec.households * spec.days);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t h = 0; h < spec.households; ++h) {
    Rng rng(mix_seed(spec.seed, h));
    const auto id = household_id(h);

    HouseholdProfile truth{id, {}};
    HouseholdProfile reported{id, {}};
    double target = spec.entropy_min + (spec.entropy_max - spec.entropy_min) * unit(rng);
    for (auto ind : all_indicators()) {
      const bool has = unit(rng) < spec.indicator_prevalence;
      truth.set(ind, has);
      const bool blank = unit(rng) < spec.survey_missing_fraction;
      if (!blank) reported.set(ind, has);
      if (has) target += spec.entropy_bias[static_cast<std::size_t>(ind)];
    }
    target = std::clamp(target, 0.0, max_entropy);
    corpus.household_entropy.push_back(target);
    corpus.household_truth.push_back(truth);
    corpus.survey.push_back(reported);

    std::vector<std::size_t> order(spec.archetypes);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto mixture = mixture_with_entropy(target, order);

    const double baseload = spec.baseload_min_kw + (spec.baseload_max_kw - spec.baseload_min_kw) * unit(rng);

    for (std::size_t d = 0; d < spec.days; ++d) {
      const auto& weather = corpus.weather[d];
      const double heat = std::clamp((weather.avg_temp_f - spec.cooling_threshold_f) / spec.cooling_span_f, 0.0, 1.0);
      const double w = std::clamp(spec.temperature_response * heat, 0.0, 1.0);
      std::vector<double> p = mixture;
      for (auto& v : p) v *= (1.0 - w);
      p[spec.cooling_archetype] += w;
      const std::size_t archetype = draw_category(p, rng);

      HourlyProfile shape = corpus.archetypes[archetype];
      if (unit(rng) < spec.outlier_fraction) {
        const double mix = spec.outlier_weight_min + (spec.outlier_weight_max - spec.outlier_weight_min) * unit(rng);
        const int hour = static_cast<int>(unit(rng) * kHoursPerDay) % static_cast<int>(kHoursPerDay);
        const auto bump = build_archetype({{hour, 1.0}});
        for (std::size_t t = 0; t < kHoursPerDay; ++t) shape[t] = (1.0 - mix) * shape[t] + mix * bump[t];
      }
      std::normal_distribution<double> noise(0.0, spec.noise_level);
      for (double& v : shape) v = std::max(0.0, v + noise(rng));
      double total = std::accumulate(shape.begin(), shape.end(), 0.0);
      if (total <= 0.0) {
        shape = corpus.archetypes[archetype];
        total = 1.0;
      }

      double day_base = baseload * (0.9 + 0.2 * unit(rng));
      double discretionary =
          spec.discretionary_min_kwh + (spec.discretionary_max_kwh - spec.discretionary_min_kwh) * unit(rng);
      const bool bad = unit(rng) < spec.bad_day_fraction;
      const bool missing_hour = bad && unit(rng) < 0.5;
      if (bad && !missing_hour) {
        day_base = 0.02;
        discretionary = 1.5;
      }

      LoadDay day{{id, weather.date}, {}};
      for (std::size_t t = 0; t < kHoursPerDay; ++t) day.kwh[t] = day_base + discretionary * shape[t] / total;
      if (missing_hour) day.kwh[static_cast<std::size_t>(unit(rng) * kHoursPerDay) % kHoursPerDay] = std::nullopt;

      corpus.truth.push_back({day.key, archetype});
      corpus.meter.push_back(std::move(day));
    }
  }
  return corpus;
}

SyntheticSpec synthetic_spec_from_key_values(const std::map<std::string, std::string>& kv) {
  static const std::vector<std::string> kKnown = {
      "archetypes", "households", "start_date", "days", "noise_level", "outlier_fraction", "outlier_weight_min",
      "outlier_weight_max",
      "temperature_response", "cooling_archetype", "cooling_threshold_f", "cooling_span_f", "entropy_min",
      "entropy_max", "indicator_prevalence", "survey_missing_fraction", "bad_day_fraction", "baseload_min_kw",
      "baseload_max_kw", "discretionary_min_kwh", "discretionary_max_kwh", "temp_mean_f", "temp_amplitude_f",
      "temp_noise_f", "temp_peak_day", "seed"};
  for (const auto& [key, value] : kv) {
    if (key.rfind("entropy_bias.", 0) == 0) {
      if (!parse_indicator(key.substr(13))) {
        throw InvalidArgument("synthetic config: unknown indicator in '" + key + "'; allowed: " +
                              indicator_vocabulary());
      }
      continue;
    }
    if (std::find(kKnown.begin(), kKnown.end(), key) == kKnown.end()) {
      throw InvalidArgument("synthetic config: unknown key '" + key + "'");
    }
  }

  SyntheticSpec spec;
  spec.archetypes = get_count(kv, "archetypes", spec.archetypes);
  spec.households = get_count(kv, "households", spec.households);
  if (const auto it = kv.find("start_date"); it != kv.end()) {
    const auto date = Date::parse(it->second);
    if (!date) throw InvalidArgument("synthetic config: start_date must be YYYY-MM-DD");
    spec.start_date = *date;
  }
  spec.days = get_count(kv, "days", spec.days);
  spec.noise_level = get_double(kv, "noise_level", spec.noise_level);
  spec.outlier_fraction = get_double(kv, "outlier_fraction", spec.outlier_fraction);
  spec.outlier_weight_min = get_double(kv, "outlier_weight_min", spec.outlier_weight_min);
  spec.outlier_weight_max = get_double(kv, "outlier_weight_max", spec.outlier_weight_max);
  spec.temperature_response = get_double(kv, "temperature_response", spec.temperature_response);
  spec.cooling_archetype = get_count(kv, "cooling_archetype", spec.cooling_archetype);
  spec.cooling_threshold_f = get_double(kv, "cooling_threshold_f", spec.cooling_threshold_f);
  spec.cooling_span_f = get_double(kv, "cooling_span_f", spec.cooling_span_f);
  spec.entropy_min = get_double(kv, "entropy_min", spec.entropy_min);
  spec.entropy_max = get_double(kv, "entropy_max", spec.entropy_max);
  spec.indicator_prevalence = get_double(kv, "indicator_prevalence", spec.indicator_prevalence);
  spec.survey_missing_fraction = get_double(kv, "survey_missing_fraction", spec.survey_missing_fraction);
  spec.bad_day_fraction = get_double(kv, "bad_day_fraction", spec.bad_day_fraction);
  spec.baseload_min_kw = get_double(kv, "baseload_min_kw", spec.baseload_min_kw);
  spec.baseload_max_kw = get_double(kv, "baseload_max_kw", spec.baseload_max_kw);
  spec.discretionary_min_kwh = get_double(kv, "discretionary_min_kwh", spec.discretionary_min_kwh);
  spec.discretionary_max_kwh = get_double(kv, "discretionary_max_kwh", spec.discretionary_max_kwh);
  spec.temp_mean_f = get_double(kv, "temp_mean_f", spec.temp_mean_f);
  spec.temp_amplitude_f = get_double(kv, "temp_amplitude_f", spec.temp_amplitude_f);
  spec.temp_noise_f = get_double(kv, "temp_noise_f", spec.temp_noise_f);
  spec.temp_peak_day = static_cast<int>(get_int(kv, "temp_peak_day", spec.temp_peak_day));
  spec.seed = static_cast<std::uint64_t>(get_int(kv, "seed", static_cast<long long>(spec.seed)));
  for (auto ind : all_indicators()) {
    spec.entropy_bias[static_cast<std::size_t>(ind)] =
        get_double(kv, "entropy_bias." + std::string(indicator_name(ind)), 0.0);
  }
  return spec;
}

std::map<std::string, std::string> to_key_values(const SyntheticSpec& spec) {
  std::map<std::string, std::string> kv;
  kv["archetypes"] = std::to_string(spec.archetypes);
  kv["households"] = std::to_string(spec.households);
  kv["start_date"] = spec.start_date.iso();
  kv["days"] = std::to_string(spec.days);
  kv["noise_level"] = csv::format_double(spec.noise_level);
  kv["outlier_fraction"] = csv::format_double(spec.outlier_fraction);
  kv["outlier_weight_min"] = csv::format_double(spec.outlier_weight_min);
  kv["outlier_weight_max"] = csv::format_double(spec.outlier_weight_max);
  kv["temperature_response"] = csv::format_double(spec.temperature_response);
  kv["cooling_archetype"] = std::to_string(spec.cooling_archetype);
  kv["cooling_threshold_f"] = csv::format_double(spec.cooling_threshold_f);
  kv["cooling_span_f"] = csv::format_double(spec.cooling_span_f);
  kv["entropy_min"] = csv::format_double(spec.entropy_min);
  kv["entropy_max"] = csv::format_double(spec.entropy_max);
  kv["indicator_prevalence"] = csv::format_double(spec.indicator_prevalence);
  kv["survey_missing_fraction"] = csv::format_double(spec.survey_missing_fraction);
  kv["bad_day_fraction"] = csv::format_double(spec.bad_day_fraction);
  kv["baseload_min_kw"] = csv::format_double(spec.baseload_min_kw);
  kv["baseload_max_kw"] = csv::format_double(spec.baseload_max_kw);
  kv["discretionary_min_kwh"] = csv::format_double(spec.discretionary_min_kwh);
  kv["discretionary_max_kwh"] = csv::format_double(spec.discretionary_max_kwh);
  kv["temp_mean_f"] = csv::format_double(spec.temp_mean_f);
  kv["temp_amplitude_f"] = csv::format_double(spec.temp_amplitude_f);
  kv["temp_noise_f"] = csv::format_double(spec.temp_noise_f);
  kv["temp_peak_day"] = std::to_string(spec.temp_peak_day);
  kv["seed"] = std::to_string(spec.seed);
  for (auto ind : all_indicators()) {
    const double bias = spec.entropy_bias[static_cast<std::size_t>(ind)];
    if (bias != 0.0) kv["entropy_bias." + std::string(indicator_name(ind))] = csv::format_double(bias);
  }
  return kv;
}

void write_synthetic(const std::filesystem::path& dir, const SyntheticCorpus& corpus) {
  std::filesystem::create_directories(dir);
  write_meter_corpus(dir / "meter.csv", corpus.meter, MeterSchema::kWide);
  write_weather(dir / "weather.csv", corpus.weather);
  write_survey(dir / "survey.csv", corpus.survey);
  std::string out = "household_id,date,archetype_id\n";
  for (const auto& t : corpus.truth) {
    out += t.key.household_id;
    out += ',';
    out += t.key.date.iso();
    out += ',';
    out += std::to_string(t.archetype);
    out += '\n';
  }
  csv::write_file(dir / "truth.csv", out);
}

std::vector<TruthRecord> read_truth(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty() || lines[0] != "household_id,date,archetype_id") {
    throw FormatError(path.string() + ": expected header household_id,date,archetype_id");
  }
  std::vector<TruthRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = csv::split(lines[i]);
    const auto date = f.size() == 3 ? Date::parse(f[1]) : std::nullopt;
    const auto arch = f.size() == 3 ? csv::parse_int(f[2]) : std::nullopt;
    if (!date || !arch || *arch < 0) throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": bad row");
    out.push_back({{std::string(f[0]), *date}, static_cast<std::size_t>(*arch)});
  }
  return out;
}

}  // namespace loadshape
