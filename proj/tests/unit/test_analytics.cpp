#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "loadshape/analytics.hpp"
#include "loadshape/error.hpp"
#include "loadshape/synthetic.hpp"
#include "test_support.hpp"

using namespace loadshape;

namespace {

AssignedDay day(const std::string& hh, Date date, std::size_t shape, std::optional<double> temp = std::nullopt) {
  return {{hh, date}, shape, 1.0, 1.0, temp};
}

HourlyProfile offset(const HourlyProfile& base, std::size_t hour, double delta) {
  auto out = base;
  out[hour] += delta;
  return out;
}

}  // namespace

TEST_CASE("entropy of small distributions") {
  CHECK(entropy(std::vector<double>{1.0, 0.0}) == 0.0);
  CHECK(entropy(std::vector<double>{0.5, 0.5}) == doctest::Approx(std::log(2.0)));
  for (std::size_t k : {2u, 5u, 13u}) {
    std::vector<double> u(k, 1.0 / static_cast<double>(k));
    CHECK(entropy(u) == doctest::Approx(std::log(static_cast<double>(k))));
  }
  CHECK(entropy(std::vector<double>{0.7, 0.2, 0.1}) ==
        doctest::Approx(-(0.7 * std::log(0.7) + 0.2 * std::log(0.2) + 0.1 * std::log(0.1))));
  CHECK_THROWS_AS(entropy(std::vector<double>{0.5, 0.4}), NotADistributionError);
  CHECK_THROWS_AS(entropy(std::vector<double>{1.2, -0.2}), NotADistributionError);

  CHECK(entropy_of_counts(std::vector<std::size_t>{3, 3}) == doctest::Approx(std::log(2.0)));
  CHECK(entropy_of_counts(std::vector<std::size_t>{0, 9, 0}) == 0.0);
  CHECK_THROWS_AS(entropy_of_counts(std::vector<std::size_t>{0, 0}), EmptyInputError);
}

TEST_CASE("entropy stays within [0, log k]") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> count(0, 50);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> c(7);
    for (auto& v : c) v = count(rng);
    c[0] += 1;
    const double s = entropy_of_counts(c);
    CHECK(s >= 0.0);
    CHECK(s <= std::log(7.0) + 1e-12);
  }
}

TEST_CASE("stratified entropy") {
  const std::vector<AssignedDay> records{
      day("a", {2011, 7, 4}, 0),   // summer, weekday
      day("a", {2011, 7, 9}, 1),   // summer, weekend
      day("b", {2011, 7, 5}, 0),   // summer, weekday
      day("b", {2012, 1, 10}, 2),  // winter, weekday
  };
  auto strata = season_strata();
  for (auto& s : day_type_strata()) strata.push_back(s);
  const auto report = stratified_entropy(records, strata, 3);
  REQUIRE(report.size() == 6);
  std::map<std::string, StratumEntropy> by_label;
  for (const auto& e : report) by_label[e.label] = e;
  CHECK(by_label["summer"].days == 3);
  CHECK(*by_label["summer"].entropy == doctest::Approx(entropy_of_counts(std::vector<std::size_t>{2, 1, 0})));
  CHECK(by_label["winter"].entropy == 0.0);
  CHECK(by_label["spring"].days == 0);
  CHECK_FALSE(by_label["spring"].entropy.has_value());
  CHECK_FALSE(by_label["autumn"].entropy.has_value());
  CHECK(by_label["weekend"].frequencies == std::vector<double>{0.0, 1.0, 0.0});

  SUBCASE("overlapping strata are rejected") {
    std::vector<Stratum> bad{{"x", "all", [](const AssignedDay&) { return true; }},
                             {"x", "summer", [](const AssignedDay& r) { return r.key.date.month() == 7; }}};
    CHECK_THROWS_AS(stratified_entropy(records, bad, 3), InvalidArgument);
  }
  SUBCASE("uncovered records are rejected") {
    std::vector<Stratum> bad{{"x", "july", [](const AssignedDay& r) { return r.key.date.month() == 7; }}};
    CHECK_THROWS_AS(stratified_entropy(records, bad, 3), InvalidArgument);
  }
  SUBCASE("shape ids outside the dictionary are rejected") {
    CHECK_THROWS_AS(stratified_entropy(records, strata, 2), InvalidArgument);
  }
}

TEST_CASE("entropy over strata with disjoint shape supports decomposes") {
  // S = sum_k w_k S_k + S(w) when strata use disjoint sets of shapes.
  std::mt19937_64 rng(21);
  std::vector<AssignedDay> records;
  std::uniform_int_distribution<std::size_t> low(0, 3);
  std::uniform_int_distribution<std::size_t> high(4, 9);
  for (int i = 0; i < 300; ++i) records.push_back(day("h", Date{2011, 6, 1}, low(rng)));
  for (int i = 0; i < 120; ++i) records.push_back(day("h", Date{2011, 6, 2}, high(rng)));
  const std::vector<Stratum> strata{
      {"all", "all", [](const AssignedDay&) { return true; }},
      {"group", "low", [](const AssignedDay& r) { return r.shape_id < 4; }},
      {"group", "high", [](const AssignedDay& r) { return r.shape_id >= 4; }},
  };
  const auto report = stratified_entropy(records, strata, 10);
  const double w_low = 300.0 / 420.0;
  const double w_high = 120.0 / 420.0;
  const double mixed = w_low * *report[1].entropy + w_high * *report[2].entropy -
                       (w_low * std::log(w_low) + w_high * std::log(w_high));
  CHECK(*report[0].entropy == doctest::Approx(mixed).epsilon(1e-12));
}

TEST_CASE("empirical temperature quartiles split days evenly") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> t(55.0, 100.0);
  for (std::size_t n : {8u, 41u, 92u, 97u}) {
    std::vector<double> temps(n);
    for (auto& v : temps) v = t(rng);
    const auto bins = temperature_quartiles(temps);
    auto sorted = temps;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 1; k <= 3; ++k) CHECK(bins.boundaries[k - 1] == sorted[k * n / 4]);
    std::array<std::size_t, 4> sizes{};
    for (double v : temps) ++sizes[bins.bin(v)];
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    CHECK(*hi - *lo <= 1);
    CHECK(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) == n);
  }
  CHECK_THROWS_AS(temperature_quartiles(std::vector<double>{70, 70, 71, 72, 72}), InvalidArgument);
}

TEST_CASE("fixed temperature bins are left-closed") {
  const auto bins = fixed_temperature_bins(68.0, 71.0, 76.0);
  CHECK(bins.bin(78.0) == 3);
  CHECK(bins.bin(69.5) == 1);
  CHECK(bins.bin(68.0) == 1);
  CHECK(bins.bin(71.0) == 2);
  CHECK(bins.bin(67.9) == 0);
  CHECK(bins.bin(76.0) == 3);
  CHECK_THROWS_AS(fixed_temperature_bins(70.0, 65.0, 75.0), InvalidArgument);
  CHECK_THROWS_AS(fixed_temperature_bins(65.0, 65.0, 75.0), InvalidArgument);

  const auto strata = temperature_strata(bins);
  CHECK(strata[3].label == "T4");
  CHECK(strata[3].predicate(day("h", Date{2011, 7, 1}, 0, 78.0)));
  CHECK_THROWS_AS(strata[0].predicate(day("h", Date{2011, 7, 1}, 0)), InvalidArgument);
}

TEST_CASE("summer temperatures come from June through August in date order") {
  const std::vector<WeatherDay> weather{{{2011, 9, 1}, 80}, {{2011, 8, 31}, 90}, {{2011, 6, 1}, 70}, {{2011, 5, 31}, 60}};
  CHECK(summer_temperatures(weather) == std::vector<double>{70, 90});
}

TEST_CASE("household entropy") {
  const std::vector<AssignedDay> records{
      day("a", {2011, 7, 4}, 0), day("a", {2011, 7, 5}, 1), day("b", {2011, 7, 4}, 2),
      day("b", {2011, 7, 5}, 2), day("c", {2011, 1, 5}, 0), day("c", {2011, 1, 6}, 1),
  };
  const auto all = household_entropy(records, 3);
  CHECK(all.at("a") == doctest::Approx(std::log(2.0)));
  CHECK(all.at("b") == 0.0);
  CHECK(all.at("c") == doctest::Approx(std::log(2.0)));
  const auto summer = household_entropy(records, 3, [](const AssignedDay& r) { return r.key.date.month() == 7; });
  CHECK(summer.size() == 2);
  CHECK(summer.count("c") == 0);
}

TEST_CASE("characteristic entropy delta") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(1.0, 0.2);
  const auto build = [&](std::size_t n_with, std::size_t n_without, double shift) {
    std::map<std::string, double> entropies;
    std::vector<HouseholdProfile> profiles;
    for (std::size_t i = 0; i < n_with + n_without; ++i) {
      HouseholdProfile p;
      p.household_id = "H" + std::to_string(i);
      const bool has = i < n_with;
      p.set(Indicator::kElectricDryer, has);
      entropies[p.household_id] = noise(rng) + (has ? shift : 0.0);
      profiles.push_back(p);
    }
    return std::pair{entropies, profiles};
  };
  BootstrapOptions options;
  options.resamples = 2000;
  options.seed = 9;

  SUBCASE("the point estimate is the difference in means") {
    const auto [e, p] = build(30, 40, 0.3);
    double a = 0.0;
    double b = 0.0;
    for (std::size_t i = 0; i < 70; ++i) (i < 30 ? a : b) += e.at("H" + std::to_string(i));
    const auto d = characteristic_entropy_delta(e, p, Indicator::kElectricDryer, options);
    CHECK(d.n_with == 30);
    CHECK(d.n_without == 40);
    CHECK(d.delta == doctest::Approx(a / 30.0 - b / 40.0));
    CHECK(d.ci_low <= d.delta);
    CHECK(d.delta <= d.ci_high);
  }
  SUBCASE("identical groups straddle zero") {
    std::map<std::string, double> e;
    std::vector<HouseholdProfile> p;
    for (std::size_t i = 0; i < 40; ++i) {
      HouseholdProfile h;
      h.household_id = "H" + std::to_string(i);
      h.set(Indicator::kElderly, i % 2 == 0);
      e[h.household_id] = 0.5 + 0.01 * static_cast<double>(i / 2);
      p.push_back(h);
    }
    const auto d = characteristic_entropy_delta(e, p, Indicator::kElderly, options);
    CHECK(d.delta == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(d.ci_low < 0.0);
    CHECK(d.ci_high > 0.0);
  }
  SUBCASE("a fixed seed reproduces the interval") {
    const auto [e, p] = build(25, 25, 0.1);
    const auto a = characteristic_entropy_delta(e, p, Indicator::kElectricDryer, options);
    const auto b = characteristic_entropy_delta(e, p, Indicator::kElectricDryer, options);
    CHECK(a.ci_low == b.ci_low);
    CHECK(a.ci_high == b.ci_high);
  }
  SUBCASE("the interval narrows as groups grow") {
    const auto [e1, p1] = build(15, 15, 0.0);
    const auto [e2, p2] = build(600, 600, 0.0);
    const auto small = characteristic_entropy_delta(e1, p1, Indicator::kElectricDryer, options);
    const auto large = characteristic_entropy_delta(e2, p2, Indicator::kElectricDryer, options);
    CHECK(large.ci_high - large.ci_low < 0.5 * (small.ci_high - small.ci_low));
  }
  SUBCASE("unknown and tiny groups") {
    const auto [e, p] = build(10, 10, 0.0);
    CHECK_THROWS_AS(characteristic_entropy_delta(e, p, Indicator::kLowIncome, options), InvalidArgument);
    auto few = p;
    for (std::size_t i = 1; i < 10; ++i) few[i].set(Indicator::kElectricDryer, std::nullopt);
    CHECK_THROWS_AS(characteristic_entropy_delta(e, few, Indicator::kElectricDryer, options), InvalidArgument);
    options.resamples = 0;
    CHECK_THROWS_AS(characteristic_entropy_delta(e, p, Indicator::kElectricDryer, options), InvalidArgument);
  }
}

TEST_CASE("Davies-Bouldin index") {
  HourlyProfile c0{};
  c0[0] = 1.0;
  const auto c1 = offset(c0, 0, 2.0);
  const std::vector<HourlyProfile> centroids{c0, c1};
  const std::vector<HourlyProfile> points{offset(c0, 1, 0.1), offset(c0, 1, -0.1), offset(c1, 1, 0.1),
                                          offset(c1, 1, -0.1)};
  const std::vector<std::size_t> labels{0, 0, 1, 1};
  CHECK(davies_bouldin(points, labels, centroids) == doctest::Approx(0.1));

  SUBCASE("relabelling and translation leave it unchanged") {
    std::mt19937_64 rng(2);
    std::vector<HourlyProfile> pts;
    std::vector<std::size_t> lab;
    std::vector<HourlyProfile> cen(4);
    for (auto& c : cen) c = testing::random_unit_shape(rng);
    for (std::size_t i = 0; i < 60; ++i) {
      lab.push_back(i % 4);
      auto p = cen[i % 4];
      for (auto& v : p) v += 0.01 * testing::random_unit_shape(rng)[0];
      pts.push_back(p);
    }
    const double base = davies_bouldin(pts, lab, cen);
    const std::vector<std::size_t> perm{2, 0, 3, 1};
    std::vector<HourlyProfile> cen2(4);
    for (std::size_t c = 0; c < 4; ++c) cen2[perm[c]] = cen[c];
    std::vector<std::size_t> lab2;
    for (auto l : lab) lab2.push_back(perm[l]);
    CHECK(davies_bouldin(pts, lab2, cen2) == doctest::Approx(base));
    auto shift = [](HourlyProfile p) {
      for (std::size_t t = 0; t < kHoursPerDay; ++t) p[t] += 0.5 * static_cast<double>(t);
      return p;
    };
    std::vector<HourlyProfile> pts3;
    std::vector<HourlyProfile> cen3;
    for (const auto& p : pts) pts3.push_back(shift(p));
    for (const auto& c : cen) cen3.push_back(shift(c));
    CHECK(davies_bouldin(pts3, lab, cen3) == doctest::Approx(base));
  }
  SUBCASE("degenerate inputs") {
    CHECK_THROWS_AS(davies_bouldin(std::vector<HourlyProfile>{c0}, std::vector<std::size_t>{0},
                                   std::vector<HourlyProfile>{c0}),
                    InvalidArgument);
    CHECK_THROWS_AS(davies_bouldin(points, std::vector<std::size_t>{0, 0, 0, 0}, centroids), InvalidArgument);
    try {
      davies_bouldin(points, labels, std::vector<HourlyProfile>{c0, c0});
      FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
      CHECK(std::string(e.what()).find("0 and 1") != std::string::npos);
    }
  }
}

TEST_CASE("coverage curve") {
  {
    const auto curve = coverage_curve(std::vector<std::size_t>{0, 0}, std::vector<double>{2.0, 3.0}, 1);
    REQUIRE(curve.size() == 1);
    CHECK(curve[0].cumulative == 1.0);
  }
  {
    const auto curve = coverage_curve(std::vector<std::size_t>{3, 1, 2, 0}, std::vector<double>{1, 1, 1, 1}, 4);
    std::vector<double> cum;
    for (const auto& e : curve) cum.push_back(e.cumulative);
    CHECK(cum == std::vector<double>{0.25, 0.5, 0.75, 1.0});
    CHECK(curve[0].shape_id == 0);
    CHECK(curve[3].shape_id == 3);
  }
  {
    const auto curve = coverage_curve(std::vector<std::size_t>{0, 1, 1, 2}, std::vector<double>{1, 2, 3, 4}, 4);
    CHECK(curve[0].shape_id == 1);
    CHECK(curve[0].fraction == doctest::Approx(0.5));
    CHECK(curve[3].shape_id == 3);
    CHECK(curve[3].kwh == 0.0);
    CHECK(curve[3].cumulative == 1.0);
  }
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> id(0, 19);
  std::exponential_distribution<double> kwh(0.1);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> ids(500);
    std::vector<double> w(500);
    for (std::size_t i = 0; i < 500; ++i) {
      ids[i] = id(rng);
      w[i] = kwh(rng);
    }
    const auto curve = coverage_curve(ids, w, 20);
    CHECK(curve.back().cumulative == 1.0);
    for (std::size_t r = 1; r < curve.size(); ++r) {
      CHECK(curve[r].cumulative >= curve[r - 1].cumulative);
      CHECK(curve[r].fraction <= curve[r - 1].fraction);
    }
  }
  CHECK_THROWS_AS(coverage_curve(std::vector<std::size_t>{0}, std::vector<double>{0.0}, 1), InvalidArgument);
  CHECK_THROWS_AS(coverage_curve(std::vector<std::size_t>{0}, std::vector<double>{-1.0}, 1), InvalidArgument);
}

TEST_CASE("peak bins") {
  CHECK(peak_bin_of(23) == PeakBin::kNight);
  CHECK(peak_bin_of(5) == PeakBin::kNight);
  CHECK(peak_bin_of(6) == PeakBin::kMorning);
  CHECK(peak_bin_of(10) == PeakBin::kDaytime);
  CHECK(peak_bin_of(16) == PeakBin::kTou);
  CHECK(peak_bin_of(19) == PeakBin::kEvening);
  CHECK(peak_bin_of(22) == PeakBin::kEvening);
}

TEST_CASE("peak classification") {
  HourlyProfile spike{};
  spike[17] = 1.0;
  auto t = classify_peaks(spike);
  CHECK(t.peak_count == 1);
  CHECK(t.primary_hour == 17);
  CHECK(t.primary_bin == PeakBin::kTou);

  HourlyProfile twin{};
  twin[8] = 0.5;
  twin[21] = 0.5;
  t = classify_peaks(twin);
  CHECK(t.peak_count == 2);
  CHECK(t.primary_bin == PeakBin::kMorning);
  CHECK(t.peak_hours == std::vector<std::size_t>{8, 21});

  HourlyProfile flat;
  flat.fill(1.0 / 24.0);
  t = classify_peaks(flat);
  CHECK(t.peak_count == 1);
  CHECK(t.primary_hour == 0);

  SUBCASE("close peaks collapse to the higher one") {
    HourlyProfile close{};
    close[12] = 0.6;
    close[14] = 0.4;
    t = classify_peaks(close);
    CHECK(t.peak_count == 1);
    CHECK(t.primary_hour == 12);
  }
  SUBCASE("small bumps are not peaks") {
    HourlyProfile s{};
    s.fill(0.01);
    s[18] = 0.6;
    s[6] = 0.05;
    CHECK(classify_peaks(s).peak_count == 1);
  }
  SUBCASE("a plateau counts once at its first hour") {
    HourlyProfile s{};
    s[9] = s[10] = s[11] = 1.0 / 3.0;
    t = classify_peaks(s);
    CHECK(t.peak_count == 1);
    CHECK(t.primary_hour == 9);
  }
  SUBCASE("a peak across midnight") {
    HourlyProfile s{};
    s[23] = 0.3;
    s[0] = 0.5;
    s[1] = 0.2;
    t = classify_peaks(s);
    CHECK(t.peak_count == 1);
    CHECK(t.primary_hour == 0);
  }
}

TEST_CASE("generator archetypes classify as planted") {
  const auto table = default_archetype_peaks(8);
  const std::vector<std::size_t> counts{1, 1, 1, 1, 2, 3, 1, 2};
  // Archetype 7 has two equal bumps, so either may come out on top.
  const std::vector<std::vector<std::size_t>> primary{{17}, {7}, {12}, {21}, {9}, {19}, {3}, {10, 22}};
  std::vector<HourlyProfile> shapes;
  for (const auto& peaks : table) shapes.push_back(build_archetype(peaks));
  const auto tax = peak_taxonomy(shapes);
  for (std::size_t a = 0; a < 8; ++a) {
    CAPTURE(a);
    CHECK(tax[a].shape_id == a);
    CHECK(tax[a].peak_count == counts[a]);
    CHECK(std::count(primary[a].begin(), primary[a].end(), tax[a].primary_hour) == 1);
  }
}

TEST_CASE("occurrence map") {
  const std::vector<AssignedDay> records{
      day("a", {2011, 7, 1}, 0), day("a", {2011, 7, 2}, 1), day("b", {2011, 7, 1}, 0),
      day("b", {2011, 7, 2}, 0), day("c", {2011, 7, 2}, 2),
  };
  const std::vector<WeatherDay> weather{{{2011, 7, 1}, 80.0}};
  const auto map = occurrence_map(records, {0}, weather, 3);
  CHECK(map.households == std::vector<std::string>{"b", "a", "c"});
  CHECK(map.row_sums == std::vector<std::size_t>{2, 1, 0});
  CHECK(map.cells[2] == std::vector<std::int8_t>{-1, 0});
  CHECK(map.day_share[0] == 1.0);
  CHECK(map.day_share[1] == doctest::Approx(1.0 / 3.0));
  CHECK(map.day_mean_temp_f[0] == 80.0);
  CHECK_FALSE(map.day_mean_temp_f[1].has_value());
  CHECK(map.day_entropy[0] == 0.0);
  CHECK(map.day_entropy[1] == doctest::Approx(std::log(3.0)));

  const auto everything = occurrence_map(records, {0, 1, 2}, weather, 3);
  for (const auto& row : everything.cells) {
    for (auto c : row) CHECK(c != 0);
  }
  for (double s : everything.day_share) CHECK(s == 1.0);
  CHECK_THROWS_AS(occurrence_map(records, {}, weather, 3), InvalidArgument);
  CHECK_THROWS_AS(occurrence_map(records, {3}, weather, 3), InvalidArgument);
}

TEST_CASE("cooling-shape occurrence follows temperature on a hot corpus") {
  SyntheticSpec spec;
  spec.households = 60;
  spec.days = 92;
  spec.temperature_response = 0.8;
  spec.seed = 12;
  const auto corpus = generate_synthetic(spec);
  std::vector<AssignedDay> records;
  for (const auto& t : corpus.truth) records.push_back({t.key, t.archetype, 1.0, 1.0, std::nullopt});
  const auto map = occurrence_map(records, {spec.cooling_archetype}, corpus.weather, spec.archetypes);
  std::vector<double> temps;
  for (const auto& t : map.day_mean_temp_f) temps.push_back(*t);
  CHECK(pearson(map.day_share, temps) > 0.5);
}

TEST_CASE("pearson") {
  CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0));
  CHECK(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(std::isnan(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3})));
  CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}), InvalidArgument);
}

TEST_CASE("analytics files carry a provenance line") {
  testing::TempDir dir("analytics");
  const Provenance prov{{"run_id", "abc"}, {"note", "a,b"}};
  CHECK(provenance_line(prov) == "# note=a;b,run_id=abc\n");
  const auto curve = coverage_curve(std::vector<std::size_t>{0, 1}, std::vector<double>{3, 1}, 2);
  write_coverage_curve(dir / "c.csv", curve, prov);
  const auto lines = read_data_lines(dir / "c.csv");
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].rfind("rank,", 0) == 0);
}
