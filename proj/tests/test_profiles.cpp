#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "occureward/env.hpp"
#include "occureward/profiles.hpp"

using namespace occureward;

namespace {

constexpr const char* kHeader = "age,sex,air_temp,thermal_comfort,health_flag\n";

LoadReport load_from(const std::string& body) {
  std::istringstream in(std::string(kHeader) + body);
  return load_records(in);
}

// Brute-force quantile oracle, written independently of quantile_linear:
// walks the sorted sample and blends the two bracketing order statistics.
double quantile_oracle(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  const double virtual_index = p * static_cast<double>(n - 1);
  size_t below = 0;
  while (below + 1 < n && static_cast<double>(below + 1) <= virtual_index) ++below;
  const double weight_hi = virtual_index - static_cast<double>(below);
  const size_t above = below + 1 < n ? below + 1 : below;
  return (1.0 - weight_hi) * v[below] + weight_hi * v[above];
}

ProfileQuery elderly_female() {
  return {"Elderly Female", 65, 95, {Sex::Female}, false, 1.0};
}

std::string row(double age, const char* sex, double temp, int comfort, int health = 0) {
  std::ostringstream os;
  os << age << ',' << sex << ',' << temp << ',' << comfort << ',' << health << '\n';
  return os.str();
}

}  // namespace

TEST_CASE("load_records parses valid rows and tallies rejects") {
  const auto r = load_from(row(30, "M", 24.0, 5) + row(70, "F", 22.0, 7) + row(40, "F", 23.0, 4));
  CHECK(r.records.size() == 2);
  CHECK(r.rejected == 1);
  CHECK(r.rejection_reasons.at("thermal-comfort-out-of-range") == 1);
}

TEST_CASE("load_records on a header-only file") {
  const auto r = load_from("");
  CHECK(r.records.empty());
  CHECK(r.rejected == 0);
}

TEST_CASE("load_records keeps ten well-formed rows") {
  std::string body;
  for (int i = 0; i < 10; ++i) {
    body += row(20.0 + i, i % 2 == 0 ? "M" : "F", 21.0 + 0.5 * i, 1 + i % 6, i % 2);
  }
  const auto r = load_from(body);
  CHECK(r.records.size() == 10);
  CHECK(r.rejected == 0);
  CHECK(r.records[3].sex == Sex::Female);
  CHECK(r.records[3].health_flag);
}

TEST_CASE("load_records rejects out-of-window temperatures and bad fields") {
  const auto r = load_from(row(30, "M", -5.0, 4) + row(30, "M", 55.0, 4) +
                           row(30, "X", 24.0, 4) + "oops,M,24,4\n" + row(30, "M", 24.0, 4));
  CHECK(r.records.size() == 1);
  CHECK(r.rejected == 4);
}

TEST_CASE("load_records requires every named column") {
  std::istringstream in("age,sex,air_temp,thermal_comfort\n30,M,24,4\n");
  CHECK_THROWS_AS(load_records(in), Error);
  std::istringstream empty("");
  CHECK_THROWS_AS(load_records(empty), Error);
}

TEST_CASE("filter_records applies age, sex and health predicates") {
  std::vector<ComfortRecord> recs = {
      {20, Sex::Male, 24, 5, false},
      {40, Sex::Male, 24, 5, false},
      {70, Sex::Male, 24, 5, false},
  };
  ProfileQuery q{"q", 18, 35, {Sex::Male}, false, 1.0};
  auto out = filter_records(recs, q);
  REQUIRE(out.size() == 1);
  CHECK(out[0].age == 20);

  // Both sexes, no health restriction: identity on age matches.
  std::vector<ComfortRecord> mixed = {
      {30, Sex::Male, 24, 5, false},
      {30, Sex::Female, 25, 5, true},
  };
  ProfileQuery all{"q", 0, 99, {Sex::Male, Sex::Female}, false, 1.0};
  CHECK(filter_records(mixed, all).size() == 2);

  ProfileQuery health{"q", 0, 99, {Sex::Male, Sex::Female}, true, 1.0};
  auto health_out = filter_records(mixed, health);
  REQUIRE(health_out.size() == 1);
  CHECK(health_out[0].sex == Sex::Female);
}

TEST_CASE("filter_records finds the authored matches in a mixed fixture") {
  std::vector<ComfortRecord> recs;
  for (int i = 0; i < 9; ++i) {
    recs.push_back({25.0 + i, i % 2 == 0 ? Sex::Male : Sex::Female, 23.0, 4, false});
  }
  recs.push_back({70, Sex::Female, 22.0, 5, false});
  recs.push_back({82, Sex::Female, 23.0, 4, false});
  recs.push_back({68, Sex::Female, 22.5, 3, false});
  const auto out = filter_records(recs, elderly_female());
  CHECK(out.size() == 3);
}

TEST_CASE("build_profile computes the interquartile band") {
  std::vector<ComfortRecord> recs;
  for (double t : {20, 21, 22, 23, 24, 25, 26, 27}) {
    recs.push_back({70, Sex::Female, t, 5, false});
  }
  const auto built = build_profile(recs, elderly_female());
  CHECK(built.profile.t_min == doctest::Approx(21.75).epsilon(1e-12));
  CHECK(built.profile.t_max == doctest::Approx(25.25).epsilon(1e-12));
  CHECK(built.matched_records == 8);
  CHECK(built.comfortable_records == 8);
  CHECK(built.profile.sample_size == 8);
  CHECK(built.profile.sex == Sex::Female);
}

TEST_CASE("build_profile with four comfortable temps") {
  std::vector<ComfortRecord> recs;
  for (double t : {21, 23, 25, 27}) {
    recs.push_back({70, Sex::Female, t, 4, false});
  }
  const auto built = build_profile(recs, elderly_female());
  CHECK(built.profile.t_min == doctest::Approx(22.5).epsilon(1e-12));
  CHECK(built.profile.t_max == doctest::Approx(25.5).epsilon(1e-12));
}

TEST_CASE("build_profile rejects degenerate and short samples") {
  std::vector<ComfortRecord> equal;
  for (int i = 0; i < 5; ++i) equal.push_back({70, Sex::Female, 24.0, 5, false});
  CHECK_THROWS_AS(build_profile(equal, elderly_female()), Error);
  try {
    build_profile(equal, elderly_female());
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateRange);
  }

  std::vector<ComfortRecord> few = {
      {70, Sex::Female, 22, 5, false},
      {70, Sex::Female, 23, 5, false},
      {70, Sex::Female, 24, 5, false},
  };
  try {
    build_profile(few, elderly_female());
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientData);
    CHECK(std::string(e.what()).find("Elderly Female") != std::string::npos);
  }
}

TEST_CASE("build_profile counts matched vs comfortable records separately") {
  std::vector<ComfortRecord> recs;
  for (double t : {21.0, 22.0, 23.0, 24.0, 25.0}) {
    recs.push_back({70, Sex::Female, t, 5, false});
  }
  recs.push_back({70, Sex::Female, 30.0, 2, false});  // matched, not comfortable
  const auto built = build_profile(recs, elderly_female());
  CHECK(built.matched_records == 6);
  CHECK(built.comfortable_records == 5);
  CHECK(built.profile.sample_size == 6);
}

TEST_CASE("build_profile is permutation invariant and threshold monotone") {
  std::mt19937_64 rng(99);
  std::vector<ComfortRecord> recs;
  for (int i = 0; i < 40; ++i) {
    recs.push_back({66.0 + 20.0 * uniform01(rng), Sex::Female,
                    20.0 + 8.0 * uniform01(rng), 1 + static_cast<int>(uniform01(rng) * 6),
                    false});
  }
  const auto base = build_profile(recs, elderly_female());

  auto shuffled = recs;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto reordered = build_profile(shuffled, elderly_female());
  CHECK(reordered.profile.t_min == base.profile.t_min);
  CHECK(reordered.profile.t_max == base.profile.t_max);

  // Raising the comfort threshold never widens the comfortable set.
  size_t prev = recs.size() + 1;
  for (int thr = 1; thr <= 6; ++thr) {
    size_t count = 0;
    for (const auto& r : filter_records(recs, elderly_female())) {
      if (r.thermal_comfort >= thr) ++count;
    }
    CHECK(count <= prev);
    prev = count;
  }
}

TEST_CASE("quantile matches the brute-force oracle on random fixtures") {
  std::mt19937_64 rng(2024);
  for (int iter = 0; iter < 100; ++iter) {
    const int n = 4 + static_cast<int>(uniform01(rng) * 497.0);
    std::vector<double> temps(static_cast<size_t>(n));
    for (auto& t : temps) t = 10.0 + 30.0 * uniform01(rng);
    for (double p : {0.25, 0.75}) {
      CHECK(quantile_linear(temps, p) ==
            doctest::Approx(quantile_oracle(temps, p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("quantile property: a quarter of the sample sits beyond each edge") {
  std::mt19937_64 rng(77);
  for (int iter = 0; iter < 200; ++iter) {
    const int n = 4 + static_cast<int>(uniform01(rng) * 60.0);
    std::vector<double> temps(static_cast<size_t>(n));
    for (auto& t : temps) t = 18.0 + 12.0 * uniform01(rng);
    const double q25 = quantile_linear(temps, 0.25);
    const double q75 = quantile_linear(temps, 0.75);
    const auto below = std::count_if(temps.begin(), temps.end(),
                                     [&](double t) { return t <= q25 + 1e-9; });
    const auto above = std::count_if(temps.begin(), temps.end(),
                                     [&](double t) { return t >= q75 - 1e-9; });
    CHECK(below >= static_cast<long>(std::floor(0.25 * n)));
    CHECK(above >= static_cast<long>(std::floor(0.25 * n)));
  }
}

TEST_CASE("query documents round-trip and validate") {
  const auto qs = builtin_queries();
  const auto loaded = queries_from_json(queries_to_json(qs));
  REQUIRE(loaded.size() == qs.size());
  CHECK(loaded[3].health_only);
  CHECK(loaded[3].sexes.size() == 2);
  CHECK_THROWS_AS(queries_from_json("{\"queries\": [{\"id\": \"x\"}]}"), Error);

  ProfileQuery bad{"", 10, 20, {Sex::Male}, false, 1.0};
  CHECK_THROWS_AS(bad.validate(), Error);
  ProfileQuery bad_flex{"x", 10, 20, {Sex::Male}, false, 0.0};
  CHECK_THROWS_AS(bad_flex.validate(), Error);
}
