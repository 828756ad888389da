#include "loadshape/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "loadshape/csv.hpp"
#include "loadshape/error.hpp"
#include "loadshape/parallel.hpp"
#include "loadshape/random.hpp"

namespace loadshape {

namespace {

HourlyProfile readings(const LoadDay& day) {
  HourlyProfile out{};
  for (std::size_t t = 0; t < kHoursPerDay; ++t) {
    if (!day.kwh[t]) {
      throw InvalidArgument("day " + day.key.household_id + " " + day.key.date.iso() + " has a missing hour " +
                            std::to_string(t + 1));
    }
    out[t] = *day.kwh[t];
  }
  return out;
}

bool low_demand(const LoadDay& day) {
  double total = 0.0;
  for (const auto& v : day.kwh) total += *v;
  // Absorbs summation rounding so a constant 0.2 kWh day stays on the
  // retained side of the boundary.
  return total / static_cast<double>(kHoursPerDay) < kLowDemandKw - 1e-12;
}

}  // namespace

CleanResult clean(const std::vector<LoadDay>& days) {
  CleanResult result;
  result.report.input = days.size();
  for (const auto& day : days) {
    if (!day.complete()) {
      ++result.report.dropped_missing_hours;
    } else if (low_demand(day)) {
      ++result.report.dropped_low_demand;
    } else {
      result.days.push_back(day);
    }
  }
  result.report.retained = result.days.size();
  return result;
}

HourlyProfile demin(const HourlyProfile& kwh) {
  const double lowest = *std::min_element(kwh.begin(), kwh.end());
  HourlyProfile out{};
  for (std::size_t t = 0; t < kHoursPerDay; ++t) out[t] = kwh[t] - lowest;
  return out;
}

HourlyProfile demin(const LoadDay& day) { return demin(readings(day)); }

ShapeVector normalize(const HourlyProfile& deminned, DayKey source, double day_total_kwh) {
  const double total = std::accumulate(deminned.begin(), deminned.end(), 0.0);
  if (!(total > 0.0)) {
    throw ZeroDiscretionaryError("day " + source.household_id + " " + source.date.iso() +
                                 " has zero discretionary usage");
  }
  ShapeVector shape;
  for (std::size_t t = 0; t < kHoursPerDay; ++t) shape.values[t] = deminned[t] / total;
  shape.source = std::move(source);
  shape.day_total_kwh = day_total_kwh;
  shape.discretionary_kwh = total;
  return shape;
}

ShapeResult build_shapes(const std::vector<LoadDay>& days) {
  auto cleaned = clean(days);
  const auto& kept = cleaned.days;
  std::vector<std::optional<ShapeVector>> slots(kept.size());
  parallel::for_chunks(kept.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto raw = readings(kept[i]);
      const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
      const auto deminned = demin(raw);
      if (std::all_of(deminned.begin(), deminned.end(), [](double v) { return v == 0.0; })) continue;
      slots[i] = normalize(deminned, kept[i].key, total);
    }
  });

  ShapeResult result;
  result.report = cleaned.report;
  result.shapes.reserve(kept.size());
  for (auto& slot : slots) {
    if (slot) {
      result.shapes.push_back(std::move(*slot));
    } else {
      ++result.report.dropped_zero_discretionary;
    }
  }
  result.report.retained = result.shapes.size();
  return result;
}

std::vector<std::size_t> subsample_indices(std::size_t population, std::size_t n, std::uint64_t seed) {
  if (n > population) {
    throw InvalidArgument("subsample of " + std::to_string(n) + " requested from a population of " +
                          std::to_string(population));
  }
  std::vector<std::size_t> index(population);
  std::iota(index.begin(), index.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, population - 1);
    std::swap(index[i], index[pick(rng)]);
  }
  index.resize(n);
  std::sort(index.begin(), index.end());
  return index;
}

std::vector<ShapeVector> subsample(const std::vector<ShapeVector>& shapes, std::size_t n, std::uint64_t seed) {
  std::vector<ShapeVector> out;
  out.reserve(n);
  for (auto i : subsample_indices(shapes.size(), n, seed)) out.push_back(shapes[i]);
  return out;
}

namespace {

std::string shapes_header() {
  std::string h = "household_id,date,day_total_kwh,discretionary_kwh";
  for (std::size_t t = 1; t <= kHoursPerDay; ++t) h += ",v" + std::to_string(t);
  return h;
}

}  // namespace

void write_shapes(const std::filesystem::path& path, const std::vector<ShapeVector>& shapes) {
  std::string out = shapes_header() + "\n";
  std::vector<std::string> row;
  for (const auto& s : shapes) {
    row.clear();
    row.push_back(s.source.household_id);
    row.push_back(s.source.date.iso());
    row.push_back(csv::format_double(s.day_total_kwh));
    row.push_back(csv::format_double(s.discretionary_kwh));
    for (double v : s.values) row.push_back(csv::format_double(v));
    csv::append_row(out, row);
  }
  csv::write_file(path, out);
}

std::vector<ShapeVector> read_shapes(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty() || lines[0] != shapes_header()) {
    throw FormatError(path.string() + ": expected header " + shapes_header());
  }
  std::vector<ShapeVector> out;
  out.reserve(lines.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto where = path.string() + ":" + std::to_string(i + 1);
    const auto f = csv::split(lines[i]);
    if (f.size() != 4 + kHoursPerDay) throw FormatError(where + ": expected " + std::to_string(4 + kHoursPerDay) + " columns");
    const auto date = Date::parse(f[1]);
    const auto total = csv::parse_double(f[2]);
    const auto disc = csv::parse_double(f[3]);
    if (!date || !total || !disc) throw FormatError(where + ": bad shape row");
    ShapeVector s;
    s.source = {std::string(f[0]), *date};
    s.day_total_kwh = *total;
    s.discretionary_kwh = *disc;
    double sum = 0.0;
    for (std::size_t t = 0; t < kHoursPerDay; ++t) {
      const auto v = csv::parse_double(f[4 + t]);
      if (!v || *v < 0.0) throw FormatError(where + ": bad value v" + std::to_string(t + 1));
      s.values[t] = *v;
      sum += *v;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw FormatError(where + ": shape does not sum to 1");
    out.push_back(std::move(s));
  }
  return out;
}

void write_cleaning_report(const std::filesystem::path& path, const CleaningReport& report) {
  std::string out = "rule,count\n";
  csv::append_row(out, {"input", std::to_string(report.input)});
  csv::append_row(out, {"missing_hours", std::to_string(report.dropped_missing_hours)});
  csv::append_row(out, {"low_demand", std::to_string(report.dropped_low_demand)});
  csv::append_row(out, {"zero_discretionary", std::to_string(report.dropped_zero_discretionary)});
  csv::append_row(out, {"retained", std::to_string(report.retained)});
  csv::append_row(out, {"retention_fraction", csv::format_double(report.retention_fraction())});
  csv::write_file(path, out);
}

CleaningReport read_cleaning_report(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty() || lines[0] != "rule,count") throw FormatError(path.string() + ": expected header rule,count");
  CleaningReport r;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = csv::split(lines[i]);
    if (f.size() != 2) throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": expected 2 columns");
    if (f[0] == "retention_fraction") continue;
    const auto n = csv::parse_int(f[1]);
    if (!n || *n < 0) throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": bad count");
    const auto count = static_cast<std::size_t>(*n);
    if (f[0] == "input") r.input = count;
    else if (f[0] == "missing_hours") r.dropped_missing_hours = count;
    else if (f[0] == "low_demand") r.dropped_low_demand = count;
    else if (f[0] == "zero_discretionary") r.dropped_zero_discretionary = count;
    else if (f[0] == "retained") r.retained = count;
    else throw FormatError(path.string() + ":" + std::to_string(i + 1) + ": unknown rule " + std::string(f[0]));
  }
  return r;
}

}  // namespace loadshape
