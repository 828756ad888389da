#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "loadshape/error.hpp"
#include "loadshape/preprocess.hpp"
#include "loadshape/synthetic.hpp"
#include "test_support.hpp"

using namespace loadshape;

namespace {

LoadDay constant_day(double kwh, const std::string& id = "H1") {
  LoadDay d{{id, Date{2011, 6, 1}}, {}};
  for (auto& v : d.kwh) v = kwh;
  return d;
}

LoadDay random_day(std::mt19937_64& rng, std::size_t i) {
  std::uniform_real_distribution<double> u(0.0, 3.0);
  LoadDay d{{"H" + std::to_string(i), Date{2011, 6, 1}}, {}};
  for (auto& v : d.kwh) v = 0.3 + u(rng);
  return d;
}

double sum(const HourlyProfile& p) { return std::accumulate(p.begin(), p.end(), 0.0); }

}  // namespace

TEST_CASE("cleaning rules") {
  auto missing = constant_day(1.0, "missing");
  missing.kwh[12] = std::nullopt;
  auto both = constant_day(0.1, "both");
  both.kwh[3] = std::nullopt;
  const std::vector<LoadDay> days{missing, constant_day(0.19, "low"), constant_day(0.2, "boundary"), both,
                                  constant_day(1.0, "ok")};
  const auto r = clean(days);
  CHECK(r.report.input == 5);
  CHECK(r.report.dropped_missing_hours == 2);
  CHECK(r.report.dropped_low_demand == 1);
  CHECK(r.report.retained == 2);
  CHECK(r.report.dropped() + r.report.retained == r.report.input);
  REQUIRE(r.days.size() == 2);
  CHECK(r.days[0].key.household_id == "boundary");
}

TEST_CASE("demin") {
  CHECK(demin(constant_day(1.0)) == HourlyProfile{});
  auto d = constant_day(1.0);
  d.kwh[4] = 0.3;
  d.kwh[18] = 2.0;
  const auto out = demin(d);
  CHECK(out[4] == 0.0);
  CHECK(out[18] == doctest::Approx(1.7));
  CHECK(out[0] == doctest::Approx(0.7));
  CHECK(demin(out) == out);
  auto gap = constant_day(1.0);
  gap.kwh[2] = std::nullopt;
  CHECK_THROWS_AS(demin(gap), InvalidArgument);
}

TEST_CASE("normalize") {
  HourlyProfile x{};
  x[18] = 2.5;
  x[3] = 2.5;
  const auto s = normalize(x, {"H1", Date{2011, 6, 1}}, 12.0);
  CHECK(s.values[18] == 0.5);
  CHECK(s.discretionary_kwh == 5.0);
  CHECK(s.day_total_kwh == 12.0);
  CHECK_THROWS_AS(normalize(HourlyProfile{}), ZeroDiscretionaryError);
}

TEST_CASE("flat days are tallied as zero-discretionary") {
  std::mt19937_64 rng(1);
  const auto r = build_shapes({constant_day(1.0, "flat"), random_day(rng, 2)});
  CHECK(r.report.dropped_zero_discretionary == 1);
  CHECK(r.report.retained == 1);
  CHECK(r.shapes.size() == 1);
}

TEST_CASE("shape invariants over random days") {
  std::mt19937_64 rng(11);
  std::vector<LoadDay> days;
  for (std::size_t i = 0; i < 2000; ++i) days.push_back(random_day(rng, i));
  const auto r = build_shapes(days);
  REQUIRE(r.shapes.size() == days.size());
  for (const auto& s : r.shapes) {
    CHECK(std::abs(sum(s.values) - 1.0) <= 1e-9);
    CHECK(*std::min_element(s.values.begin(), s.values.end()) == 0.0);
  }
}

TEST_CASE("scale invariance of the discretionary part") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto base = demin(random_day(rng, 0));
    const auto ref = normalize(base).values;
    for (double c : {0.5, 2.0, 10.0}) {
      HourlyProfile scaled = base;
      for (auto& v : scaled) v *= c;
      const auto got = normalize(scaled).values;
      for (std::size_t t = 0; t < kHoursPerDay; ++t) CHECK(got[t] == doctest::Approx(ref[t]).epsilon(1e-12));
    }
  }
}

TEST_CASE("de-minning removes the flattening effect of baseload") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    HourlyProfile profile{};
    for (auto& v : profile) v = u(rng);
    profile[static_cast<std::size_t>(i) % kHoursPerDay] = 0.0;
    const double b1 = 0.2 + u(rng);
    const double b2 = b1 + 0.1 + u(rng);
    LoadDay d1{{"A", Date{2011, 6, 1}}, {}};
    LoadDay d2{{"B", Date{2011, 6, 1}}, {}};
    HourlyProfile raw1{};
    HourlyProfile raw2{};
    for (std::size_t t = 0; t < kHoursPerDay; ++t) {
      d1.kwh[t] = raw1[t] = b1 + profile[t];
      d2.kwh[t] = raw2[t] = b2 + profile[t];
    }
    const auto s1 = normalize(demin(d1)).values;
    const auto s2 = normalize(demin(d2)).values;
    for (std::size_t t = 0; t < kHoursPerDay; ++t) CHECK(s1[t] == doctest::Approx(s2[t]).epsilon(1e-12));

    const auto n1 = normalize(raw1).values;
    const auto n2 = normalize(raw2).values;
    const auto range = [](const HourlyProfile& p) {
      const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
      return *hi - *lo;
    };
    CHECK(range(n2) < range(n1));
  }
}

TEST_CASE("subsample") {
  std::vector<ShapeVector> shapes(500);
  for (std::size_t i = 0; i < shapes.size(); ++i) shapes[i].source.household_id = std::to_string(i);
  const auto all = subsample_indices(500, 500, 3);
  std::vector<std::size_t> expect(500);
  std::iota(expect.begin(), expect.end(), std::size_t{0});
  CHECK(all == expect);
  const auto a = subsample_indices(500, 100, 3);
  CHECK(a.size() == 100);
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 100);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(subsample_indices(500, 100, 3) == a);
  CHECK(subsample_indices(500, 100, 4) != a);
  CHECK(subsample(shapes, 100, 3).size() == 100);
  CHECK_THROWS_AS(subsample(shapes, 501, 3), InvalidArgument);
}

TEST_CASE("subsample is uniform over positions") {
  std::vector<double> hits(10, 0.0);
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    for (auto i : subsample_indices(10, 3, seed)) hits[i] += 1.0;
  }
  CHECK(testing::chi_square_p(hits, std::vector<double>(10, 600.0)) > 0.001);
}

TEST_CASE("injected bad days cost about their share of retention") {
  SyntheticSpec spec;
  spec.households = 200;
  spec.days = 200;
  spec.bad_day_fraction = 0.06;
  spec.seed = 17;
  const auto r = build_shapes(generate_synthetic(spec).meter);
  const double n = static_cast<double>(r.report.input);
  // Binomial standard error is about 0.0012 here.
  CHECK(r.report.retention_fraction() == doctest::Approx(0.94).epsilon(0.006 / 0.94));
  CHECK(r.report.dropped_missing_hours > 0);
  CHECK(r.report.dropped_low_demand > 0);
  CHECK(r.report.dropped() + r.report.retained == static_cast<std::size_t>(n));
}

TEST_CASE("shapes and cleaning report round-trip through CSV") {
  testing::TempDir dir("pre");
  SyntheticSpec spec;
  spec.households = 5;
  spec.days = 10;
  const auto r = build_shapes(generate_synthetic(spec).meter);
  write_shapes(dir / "shapes.csv", r.shapes);
  const auto back = read_shapes(dir / "shapes.csv");
  REQUIRE(back.size() == r.shapes.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].values == r.shapes[i].values);
    CHECK(back[i].source == r.shapes[i].source);
    CHECK(back[i].day_total_kwh == r.shapes[i].day_total_kwh);
  }
  write_cleaning_report(dir / "c.csv", r.report);
  const auto rep = read_cleaning_report(dir / "c.csv");
  CHECK(rep.input == r.report.input);
  CHECK(rep.retained == r.report.retained);
}
