#include "loadshape/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "loadshape/csv.hpp"
#include "loadshape/error.hpp"
#include "loadshape/kmeans.hpp"
#include "loadshape/parallel.hpp"
#include "loadshape/random.hpp"

namespace loadshape {

double entropy(std::span<const double> p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw NotADistributionError("negative or nan probability " + csv::format_double(v));
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw NotADistributionError("probabilities sum to " + csv::format_double(sum));
  double s = 0.0;
  for (double v : p) {
    if (v > 0.0) s -= v * std::log(v);
  }
  return std::max(s, 0.0);
}

double entropy_of_counts(std::span<const std::size_t> counts) {
  const auto total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total == 0) throw EmptyInputError("entropy of an empty count table");
  // log n - (1/n) sum c log c avoids building the probability vector and is
  // exact for uniform tables.
  const double n = static_cast<double>(total);
  double acc = 0.0;
  for (auto c : counts) {
    if (c > 0) acc += static_cast<double>(c) * std::log(static_cast<double>(c));
  }
  return std::max(std::log(n) - acc / n, 0.0);
}

EntropyReport stratified_entropy(std::span<const AssignedDay> records, std::span<const Stratum> strata,
                                 std::size_t dictionary_size) {
  for (const auto& r : records) {
    if (r.shape_id >= dictionary_size) {
      throw InvalidArgument("record " + r.key.household_id + " " + r.key.date.iso() + " has shape id " +
                            std::to_string(r.shape_id) + " outside a dictionary of " + std::to_string(dictionary_size));
    }
  }
  std::vector<std::vector<std::size_t>> counts(strata.size(), std::vector<std::size_t>(dictionary_size, 0));
  std::map<std::string, std::vector<std::size_t>> axes;
  for (std::size_t s = 0; s < strata.size(); ++s) axes[strata[s].axis].push_back(s);

  for (const auto& r : records) {
    for (const auto& [axis, members] : axes) {
      std::size_t hits = 0;
      for (auto s : members) {
        if (strata[s].predicate(r)) {
          ++counts[s][r.shape_id];
          ++hits;
        }
      }
      if (hits != 1) {
        throw InvalidArgument("record " + r.key.household_id + " " + r.key.date.iso() + " matches " +
                              std::to_string(hits) + " strata on axis " + axis);
      }
    }
  }

  EntropyReport report;
  report.reserve(strata.size());
  for (std::size_t s = 0; s < strata.size(); ++s) {
    StratumEntropy e{strata[s].axis, strata[s].label, 0, std::nullopt, std::vector<double>(dictionary_size, 0.0)};
    e.days = std::accumulate(counts[s].begin(), counts[s].end(), std::size_t{0});
    if (e.days > 0) {
      for (std::size_t c = 0; c < dictionary_size; ++c) {
        e.frequencies[c] = static_cast<double>(counts[s][c]) / static_cast<double>(e.days);
      }
      e.entropy = entropy_of_counts(counts[s]);
    }
    report.push_back(std::move(e));
  }
  return report;
}

std::vector<Stratum> season_strata() {
  std::vector<Stratum> out;
  for (auto season : {Season::kWinter, Season::kSpring, Season::kSummer, Season::kAutumn}) {
    out.push_back({"season", std::string(season_name(season)),
                   [season](const AssignedDay& r) { return season_of(r.key.date) == season; }});
  }
  return out;
}

std::vector<Stratum> day_type_strata() {
  std::vector<Stratum> out;
  for (auto type : {DayType::kWeekday, DayType::kWeekend}) {
    out.push_back({"day_type", std::string(day_type_name(type)),
                   [type](const AssignedDay& r) { return day_type_of(r.key.date) == type; }});
  }
  return out;
}

std::size_t TemperatureBins::bin(double temp_f) const {
  std::size_t k = 0;
  while (k < boundaries.size() && temp_f >= boundaries[k]) ++k;
  return k;
}

TemperatureBins temperature_quartiles(std::span<const double> summer_temps_f) {
  std::vector<double> x(summer_temps_f.begin(), summer_temps_f.end());
  std::sort(x.begin(), x.end());
  const auto distinct = static_cast<std::size_t>(std::distance(x.begin(), std::unique(x.begin(), x.end())));
  if (distinct < 4) {
    throw InvalidArgument("temperature quartiles need at least 4 distinct summer temperatures, found " +
                          std::to_string(distinct));
  }
  x.assign(summer_temps_f.begin(), summer_temps_f.end());
  std::sort(x.begin(), x.end());
  TemperatureBins bins;
  bins.empirical = true;
  for (std::size_t k = 1; k <= 3; ++k) bins.boundaries[k - 1] = x[k * x.size() / 4];
  return bins;
}

TemperatureBins fixed_temperature_bins(double b1, double b2, double b3) {
  if (!(b1 < b2 && b2 < b3)) throw InvalidArgument("temperature bin boundaries must be strictly increasing");
  TemperatureBins bins;
  bins.boundaries = {b1, b2, b3};
  return bins;
}

std::vector<double> summer_temperatures(std::span<const WeatherDay> weather) {
  std::vector<WeatherDay> days(weather.begin(), weather.end());
  std::sort(days.begin(), days.end(), [](const auto& a, const auto& b) { return a.date < b.date; });
  std::vector<double> out;
  for (const auto& d : days) {
    if (season_of(d.date) == Season::kSummer) out.push_back(d.avg_temp_f);
  }
  return out;
}

std::vector<Stratum> temperature_strata(const TemperatureBins& bins) {
  std::vector<Stratum> out;
  for (std::size_t k = 0; k < 4; ++k) {
    out.push_back({"temperature", "T" + std::to_string(k + 1), [bins, k](const AssignedDay& r) {
                     if (!r.avg_temp_f) {
                       throw InvalidArgument("no temperature for " + r.key.household_id + " " + r.key.date.iso());
                     }
                     return bins.bin(*r.avg_temp_f) == k;
                   }});
  }
  return out;
}

std::map<std::string, double> household_entropy(std::span<const AssignedDay> records, std::size_t dictionary_size,
                                                const std::function<bool(const AssignedDay&)>& filter) {
  std::map<std::string, std::vector<std::size_t>> counts;
  for (const auto& r : records) {
    if (filter && !filter(r)) continue;
    if (r.shape_id >= dictionary_size) throw InvalidArgument("shape id outside the dictionary");
    auto& c = counts[r.key.household_id];
    if (c.empty()) c.assign(dictionary_size, 0);
    ++c[r.shape_id];
  }
  std::map<std::string, double> out;
  for (const auto& [id, c] : counts) out.emplace(id, entropy_of_counts(c));
  return out;
}

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Linear interpolation between order statistics of sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

CharacteristicDelta characteristic_entropy_delta(const std::map<std::string, double>& entropies,
                                                 std::span<const HouseholdProfile> profiles, Indicator indicator,
                                                 const BootstrapOptions& options) {
  if (options.resamples == 0) throw InvalidArgument("bootstrap needs at least one resample");
  if (!(options.confidence > 0.0 && options.confidence < 1.0)) throw InvalidArgument("confidence must be in (0, 1)");
  std::vector<double> with;
  std::vector<double> without;
  for (const auto& p : profiles) {
    const auto value = p.get(indicator);
    const auto e = entropies.find(p.household_id);
    if (!value || e == entropies.end()) continue;
    (*value ? with : without).push_back(e->second);
  }
  const std::string name(indicator_name(indicator));
  if (with.empty() && without.empty()) throw InvalidArgument("indicator " + name + " is absent from every household");
  if (with.size() < 2 || without.size() < 2) {
    throw InvalidArgument("indicator " + name + " needs at least 2 households on each side, found " +
                          std::to_string(with.size()) + " with and " + std::to_string(without.size()) + " without");
  }

  CharacteristicDelta out;
  out.indicator = indicator;
  out.n_with = with.size();
  out.n_without = without.size();
  out.delta = mean(with) - mean(without);

  std::vector<double> deltas(options.resamples);
  parallel::for_chunks(options.resamples, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      Rng rng(mix_seed(options.seed, r));
      std::uniform_int_distribution<std::size_t> pick_with(0, with.size() - 1);
      std::uniform_int_distribution<std::size_t> pick_without(0, without.size() - 1);
      double a = 0.0;
      for (std::size_t i = 0; i < with.size(); ++i) a += with[pick_with(rng)];
      double b = 0.0;
      for (std::size_t i = 0; i < without.size(); ++i) b += without[pick_without(rng)];
      deltas[r] = a / static_cast<double>(with.size()) - b / static_cast<double>(without.size());
    }
  });
  std::sort(deltas.begin(), deltas.end());
  const double tail = (1.0 - options.confidence) / 2.0;
  out.ci_low = quantile(deltas, tail);
  out.ci_high = quantile(deltas, 1.0 - tail);
  return out;
}

double davies_bouldin(std::span<const HourlyProfile> points, std::span<const std::size_t> labels,
                      std::span<const HourlyProfile> centroids) {
  if (points.size() != labels.size()) throw InvalidArgument("label count does not match point count");
  const std::size_t k = centroids.size();
  if (k < 2) throw InvalidArgument("Davies-Bouldin index needs at least 2 clusters, got " + std::to_string(k));
  std::vector<double> spread(k, 0.0);
  std::vector<std::size_t> members(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] >= k) throw InvalidArgument("label " + std::to_string(labels[i]) + " has no centroid");
    spread[labels[i]] += euclidean_distance(points[i], centroids[labels[i]]);
    ++members[labels[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (members[c] == 0) throw InvalidArgument("cluster " + std::to_string(c) + " is empty");
    spread[c] /= static_cast<double>(members[c]);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      const double d = euclidean_distance(centroids[i], centroids[j]);
      if (d == 0.0) {
        throw InvalidArgument("centroids " + std::to_string(std::min(i, j)) + " and " + std::to_string(std::max(i, j)) +
                              " coincide");
      }
      worst = std::max(worst, (spread[i] + spread[j]) / d);
    }
    total += worst;
  }
  return total / static_cast<double>(k);
}

std::vector<CoverageEntry> coverage_curve(std::span<const std::size_t> shape_ids, std::span<const double> kwh,
                                          std::size_t dictionary_size) {
  if (shape_ids.size() != kwh.size()) throw InvalidArgument("weight count does not match assignment count");
  std::vector<double> per_shape(dictionary_size, 0.0);
  for (std::size_t i = 0; i < shape_ids.size(); ++i) {
    if (shape_ids[i] >= dictionary_size) throw InvalidArgument("shape id outside the dictionary");
    if (!(kwh[i] >= 0.0)) throw InvalidArgument("negative kWh weight");
    per_shape[shape_ids[i]] += kwh[i];
  }
  std::vector<std::size_t> order(dictionary_size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return per_shape[a] > per_shape[b]; });
  double total = 0.0;
  for (auto id : order) total += per_shape[id];
  if (!(total > 0.0)) throw InvalidArgument("total kWh is zero");

  std::vector<CoverageEntry> out;
  out.reserve(dictionary_size);
  double running = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    running += per_shape[order[r]];
    out.push_back({r + 1, order[r], per_shape[order[r]], per_shape[order[r]] / total, running / total});
  }
  return out;
}

std::string_view peak_bin_name(PeakBin bin) {
  switch (bin) {
    case PeakBin::kNight: return "night";
    case PeakBin::kMorning: return "morning";
    case PeakBin::kDaytime: return "daytime";
    case PeakBin::kTou: return "tou";
    case PeakBin::kEvening: return "evening";
  }
  return "unknown";
}

PeakBin peak_bin_of(std::size_t hour) {
  hour %= kHoursPerDay;
  if (hour >= 23 || hour < 6) return PeakBin::kNight;
  if (hour < 10) return PeakBin::kMorning;
  if (hour < 16) return PeakBin::kDaytime;
  if (hour < 19) return PeakBin::kTou;
  return PeakBin::kEvening;
}

namespace {

constexpr std::size_t kH = kHoursPerDay;

std::size_t wrap(std::ptrdiff_t i) {
  const auto n = static_cast<std::ptrdiff_t>(kH);
  return static_cast<std::size_t>(((i % n) + n) % n);
}

std::size_t circular_gap(std::size_t a, std::size_t b) {
  const auto d = a > b ? a - b : b - a;
  return std::min(d, kH - d);
}

struct Plateau {
  std::size_t start = 0;
  std::size_t length = 0;
};

// Lowest point passed walking away from the plateau until something at
// least as high as it; nullopt when the walk comes back around.
std::optional<double> walk_min(const HourlyProfile& x, const Plateau& p, int direction) {
  const double h = x[p.start];
  double low = h;
  std::ptrdiff_t i = direction > 0 ? static_cast<std::ptrdiff_t>(p.start + p.length) : static_cast<std::ptrdiff_t>(p.start) - 1;
  for (std::size_t steps = 0; steps < kH - p.length; ++steps, i += direction) {
    const double v = x[wrap(i)];
    if (v >= h) return low;
    low = std::min(low, v);
  }
  return std::nullopt;
}

}  // namespace

ShapeTaxonomy classify_peaks(const HourlyProfile& shape, const PeakOptions& options) {
  // First maximum, so a flat shape peaks at hour 0.
  const auto hi_it = std::max_element(shape.begin(), shape.end());
  const double low = *std::min_element(shape.begin(), shape.end());
  const double high = *hi_it;
  ShapeTaxonomy out;
  const auto argmax = static_cast<std::size_t>(std::distance(shape.begin(), hi_it));
  if (high == low) {
    out.peak_count = 1;
    out.primary_hour = argmax;
    out.primary_bin = peak_bin_of(argmax);
    out.peak_hours = {argmax};
    return out;
  }

  // Start scanning right after a value change so no plateau is cut in two.
  std::size_t origin = 0;
  while (shape[origin] == shape[wrap(static_cast<std::ptrdiff_t>(origin) - 1)]) ++origin;
  std::vector<Plateau> plateaus;
  for (std::size_t k = 0; k < kH;) {
    Plateau p{wrap(static_cast<std::ptrdiff_t>(origin + k)), 1};
    while (k + p.length < kH && shape[wrap(static_cast<std::ptrdiff_t>(origin + k + p.length))] == shape[p.start]) {
      ++p.length;
    }
    plateaus.push_back(p);
    k += p.length;
  }

  struct Candidate {
    std::size_t hour;
    double height;
  };
  std::vector<Candidate> candidates;
  const double needed = options.min_prominence_fraction * high;
  for (const auto& p : plateaus) {
    const double h = shape[p.start];
    const double left = shape[wrap(static_cast<std::ptrdiff_t>(p.start) - 1)];
    const double right = shape[wrap(static_cast<std::ptrdiff_t>(p.start + p.length))];
    if (!(left < h && right < h)) continue;
    const auto l = walk_min(shape, p, -1);
    const auto r = walk_min(shape, p, +1);
    const double base = (l && r) ? std::max(*l, *r) : low;
    if (h - base >= needed) candidates.push_back({p.start, h});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.height != b.height) return a.height > b.height;
    return a.hour < b.hour;
  });
  for (const auto& c : candidates) {
    const bool clear = std::all_of(out.peak_hours.begin(), out.peak_hours.end(), [&](std::size_t h) {
      return circular_gap(h, c.hour) >= options.min_separation_hours;
    });
    if (clear) out.peak_hours.push_back(c.hour);
  }
  if (out.peak_hours.empty()) out.peak_hours.push_back(argmax);
  out.peak_count = std::min<std::size_t>(out.peak_hours.size(), 3);
  out.primary_hour = out.peak_hours.front();
  out.primary_bin = peak_bin_of(out.primary_hour);
  return out;
}

std::vector<ShapeTaxonomy> peak_taxonomy(std::span<const HourlyProfile> centers, const PeakOptions& options) {
  std::vector<ShapeTaxonomy> out;
  out.reserve(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) {
    auto t = classify_peaks(centers[i], options);
    t.shape_id = i;
    out.push_back(std::move(t));
  }
  return out;
}

OccurrenceMap occurrence_map(std::span<const AssignedDay> records, const std::vector<std::size_t>& targets,
                             std::span<const WeatherDay> weather, std::size_t dictionary_size) {
  if (targets.empty()) throw InvalidArgument("occurrence map needs at least one target shape");
  std::vector<bool> is_target(dictionary_size, false);
  for (auto t : targets) {
    if (t >= dictionary_size) {
      throw InvalidArgument("target shape " + std::to_string(t) + " is not in a dictionary of " +
                            std::to_string(dictionary_size));
    }
    is_target[t] = true;
  }

  std::set<Date> date_set;
  std::set<std::string> household_set;
  for (const auto& r : records) {
    if (r.shape_id >= dictionary_size) throw InvalidArgument("shape id outside the dictionary");
    date_set.insert(r.key.date);
    household_set.insert(r.key.household_id);
  }
  OccurrenceMap map;
  map.dates.assign(date_set.begin(), date_set.end());
  std::vector<std::string> ids(household_set.begin(), household_set.end());
  std::map<Date, std::size_t> date_index;
  for (std::size_t d = 0; d < map.dates.size(); ++d) date_index.emplace(map.dates[d], d);
  std::map<std::string, std::size_t> household_index;
  for (std::size_t h = 0; h < ids.size(); ++h) household_index.emplace(ids[h], h);

  std::vector<std::vector<std::int8_t>> cells(ids.size(), std::vector<std::int8_t>(map.dates.size(), -1));
  std::vector<std::vector<std::size_t>> day_counts(map.dates.size(), std::vector<std::size_t>(dictionary_size, 0));
  for (const auto& r : records) {
    const auto d = date_index.at(r.key.date);
    cells[household_index.at(r.key.household_id)][d] = is_target[r.shape_id] ? 1 : 0;
    ++day_counts[d][r.shape_id];
  }

  std::vector<std::size_t> sums(ids.size(), 0);
  for (std::size_t h = 0; h < ids.size(); ++h) {
    for (auto c : cells[h]) sums[h] += c == 1 ? 1 : 0;
  }
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return sums[a] > sums[b]; });
  for (auto h : order) {
    map.households.push_back(ids[h]);
    map.cells.push_back(std::move(cells[h]));
    map.row_sums.push_back(sums[h]);
  }

  std::map<Date, double> temps;
  for (const auto& w : weather) temps[w.date] = w.avg_temp_f;
  for (std::size_t d = 0; d < map.dates.size(); ++d) {
    std::size_t present = 0;
    std::size_t hits = 0;
    for (const auto& row : map.cells) {
      if (row[d] >= 0) ++present;
      if (row[d] == 1) ++hits;
    }
    map.day_share.push_back(present == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(present));
    const auto t = temps.find(map.dates[d]);
    map.day_mean_temp_f.push_back(t == temps.end() ? std::nullopt : std::optional<double>(t->second));
    map.day_entropy.push_back(entropy_of_counts(day_counts[d]));
  }
  return map;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("pearson needs two equal series of length >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

std::string provenance_line(const Provenance& provenance) {
  std::string line = "#";
  bool first = true;
  for (const auto& [k, v] : provenance) {
    line += first ? " " : ",";
    // A comma would split the provenance field list.
    auto value = v;
    std::replace(value.begin(), value.end(), ',', ';');
    line += k + "=" + value;
    first = false;
  }
  return line + "\n";
}

namespace {

std::string optional_number(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

}  // namespace

void write_entropy_report(const std::filesystem::path& path, const EntropyReport& report, const Provenance& provenance) {
  std::string out = provenance_line(provenance) + "axis,stratum,days,entropy,frequencies\n";
  for (const auto& e : report) {
    std::string freq;
    for (std::size_t c = 0; c < e.frequencies.size(); ++c) {
      if (c > 0) freq += ';';
      freq += csv::format_double(e.frequencies[c]);
    }
    csv::append_row(out, {e.axis, e.label, std::to_string(e.days), optional_number(e.entropy), freq});
  }
  csv::write_file(path, out);
}

void write_coverage_curve(const std::filesystem::path& path, std::span<const CoverageEntry> curve,
                          const Provenance& provenance) {
  std::string out = provenance_line(provenance) + "rank,shape_id,kwh,fraction,cumulative\n";
  for (const auto& e : curve) {
    csv::append_row(out, {std::to_string(e.rank), std::to_string(e.shape_id), csv::format_double(e.kwh),
                          csv::format_double(e.fraction), csv::format_double(e.cumulative)});
  }
  csv::write_file(path, out);
}

void write_taxonomy(const std::filesystem::path& path, std::span<const ShapeTaxonomy> taxonomy,
                    const Provenance& provenance) {
  std::string out = provenance_line(provenance) + "shape_id,peak_count,primary_peak_hour,primary_peak_bin,peak_hours\n";
  for (const auto& t : taxonomy) {
    std::string hours;
    for (std::size_t i = 0; i < t.peak_hours.size(); ++i) {
      if (i > 0) hours += ';';
      hours += std::to_string(t.peak_hours[i]);
    }
    csv::append_row(out, {std::to_string(t.shape_id), t.peak_count >= 3 ? "3+" : std::to_string(t.peak_count),
                          std::to_string(t.primary_hour), std::string(peak_bin_name(t.primary_bin)), hours});
  }
  csv::write_file(path, out);
}

void write_household_entropy(const std::filesystem::path& path, const std::map<std::string, double>& entropies,
                             const std::map<std::string, std::size_t>& day_counts, const Provenance& provenance) {
  std::string out = provenance_line(provenance) + "household_id,days,entropy\n";
  for (const auto& [id, e] : entropies) {
    const auto n = day_counts.find(id);
    csv::append_row(out, {id, n == day_counts.end() ? std::string() : std::to_string(n->second), csv::format_double(e)});
  }
  csv::write_file(path, out);
}

void write_characteristic_deltas(const std::filesystem::path& path, std::span<const CharacteristicDelta> deltas,
                                 const Provenance& provenance) {
  std::string out = provenance_line(provenance) + "indicator,n_with,n_without,delta,ci_low,ci_high\n";
  for (const auto& d : deltas) {
    csv::append_row(out, {std::string(indicator_name(d.indicator)), std::to_string(d.n_with),
                          std::to_string(d.n_without), csv::format_double(d.delta), csv::format_double(d.ci_low),
                          csv::format_double(d.ci_high)});
  }
  csv::write_file(path, out);
}

void write_occurrence_map(const std::filesystem::path& path, const OccurrenceMap& map, const Provenance& provenance) {
  // Two series rows come first, then one row per household; blank cells
  // mean no record for that household-day.
  std::string out = provenance_line(provenance) + "household_id,row_sum";
  for (const auto& d : map.dates) out += "," + d.iso();
  out += "\n";
  std::vector<std::string> row{"mean_temp_f", ""};
  for (const auto& t : map.day_mean_temp_f) row.push_back(optional_number(t));
  csv::append_row(out, row);
  row = {"day_entropy", ""};
  for (double e : map.day_entropy) row.push_back(csv::format_double(e));
  csv::append_row(out, row);
  for (std::size_t h = 0; h < map.households.size(); ++h) {
    row = {map.households[h], std::to_string(map.row_sums[h])};
    for (auto c : map.cells[h]) row.push_back(c < 0 ? std::string() : std::to_string(c));
    csv::append_row(out, row);
  }
  csv::write_file(path, out);
}

std::vector<std::string> read_data_lines(const std::filesystem::path& path) {
  auto lines = csv::read_lines(path);
  if (!lines.empty() && !lines.front().empty() && lines.front()[0] == '#') lines.erase(lines.begin());
  return lines;
}

}  // namespace loadshape
