#include <cmath>
#include <random>

#include "doctest.h"
#include "marc/set_function.hpp"

using namespace marc;

namespace {

SetFunction make2(double f1, double f2, double f12) {
  SetFunction f(2);
  f.set(0b01, f1);
  f.set(0b10, f2);
  f.set(0b11, f12);
  return f;
}

// random monotone submodular function: concave transform of a weighted count
SetFunction random_submodular(int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uw(0.2, 2.0);
  std::vector<double> w(k);
  for (double& x : w) x = uw(rng);
  double curve = uw(rng);
  SetFunction f(k);
  for (SubsetMask s = 1; s <= full_mask(k); ++s) {
    double tot = 0;
    for (int u = 1; u <= k; ++u)
      if (contains(s, u)) tot += w[u - 1];
    f.set(s, std::log1p(curve * tot));
  }
  return f;
}

}  // namespace

TEST_CASE("subset ordering is cardinality then lexicographic") {
  CHECK(subset_precedes(0b001, 0b010));   // {1} < {2}
  CHECK(subset_precedes(0b100, 0b011));   // {3} < {1,2} by cardinality
  CHECK(subset_precedes(0b1001, 0b110));  // {1,4} < {2,3} lexicographically
  CHECK_FALSE(subset_precedes(0b110, 0b1001));
  CHECK(subset_to_string(0b101) == "{1,3}");
}

TEST_CASE("polymatroid check accepts modular and rejects superadditive") {
  CHECK(check_polymatroid(make2(1, 1, 2), 1e-12).ok);

  auto bad = check_polymatroid(make2(1, 1, 3), 1e-12);
  CHECK_FALSE(bad.ok);
  REQUIRE_FALSE(bad.violations.empty());
  // witnessing triple (empty set, 1, 2)
  bool found = false;
  for (const auto& v : bad.violations)
    if (v.kind == PolymatroidViolation::Kind::Submodularity && v.set == 0 && v.k1 == 1 &&
        v.k2 == 2)
      found = true;
  CHECK(found);
}

TEST_CASE("polymatroid check flags monotonicity violations") {
  auto bad = check_polymatroid(make2(1.5, 1, 1.2), 1e-12);
  CHECK_FALSE(bad.ok);
  bool found = false;
  for (const auto& v : bad.violations)
    if (v.kind == PolymatroidViolation::Kind::Monotonicity) found = true;
  CHECK(found);
}

TEST_CASE("intersection: active case with f1 sum binding") {
  auto f1 = make2(1, 1, 1.5);
  auto f2 = make2(2, 2, 3);
  auto v = intersect_max_sum(f1, f2);
  // by-hand enumeration: empty:3, {1}:1+2=3, {2}:1+2=3, full:1.5 -> min 1.5
  CHECK(v.max_sum == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(v.argmin_subset == 0b11);
  CHECK(v.f1_sum_active);
  CHECK_FALSE(v.f2_sum_active);
  CHECK(v.label.kind == CaseLabel::Kind::Active);
  CHECK(v.label.active == ActiveKind::A3a);
}

TEST_CASE("intersection: inactive case found by an interior split") {
  auto f1 = make2(0.2, 1, 1.1);
  auto f2 = make2(1, 0.2, 1.1);
  auto v = intersect_max_sum(f1, f2);
  // enumeration: empty 1.1, {1}: 0.2+0.2=0.4, {2}: 1+1=2, full 1.1
  CHECK(v.max_sum == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(v.argmin_subset == 0b01);
  CHECK(v.label.kind == CaseLabel::Kind::Inactive);
  CHECK(v.label.subset == 0b01);
  CHECK_FALSE(v.f1_sum_active);
  CHECK_FALSE(v.f2_sum_active);
}

TEST_CASE("intersection: identical modular polymatroids sit on the 3a/3b boundary") {
  auto f = make2(1, 1, 2);
  auto v = intersect_max_sum(f, f);
  CHECK(v.max_sum == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(v.f1_sum_active);
  CHECK(v.f2_sum_active);
}

TEST_CASE("intersect_max_sum equals the exhaustive split minimum exactly") {
  std::mt19937_64 rng(7);
  for (int k = 1; k <= 6; ++k) {
    for (int rep = 0; rep < 200; ++rep) {
      auto f1 = random_submodular(k, rng);
      auto f2 = random_submodular(k, rng);
      auto v = intersect_max_sum(f1, f2);
      double brute = std::numeric_limits<double>::infinity();
      for (SubsetMask s = 0; s <= full_mask(k); ++s)
        brute = std::min(brute, f1(s) + f2(full_mask(k) & ~s));
      CHECK(v.max_sum == brute);  // same floating-point expression, exact
    }
  }
}

TEST_CASE("vertex enumeration: two-user corner points") {
  auto f = make2(1, 1, 1.5);
  auto verts = enumerate_vertices(f);
  REQUIRE(verts.size() == 2);
  // permutation (1,2): R1 = f({1}) = 1 decoded last, R2 = 0.5
  CHECK(verts[0][0] == doctest::Approx(1.0));
  CHECK(verts[0][1] == doctest::Approx(0.5));
  CHECK(verts[1][0] == doctest::Approx(0.5));
  CHECK(verts[1][1] == doctest::Approx(1.0));
}

TEST_CASE("vertex enumeration: K = 1") {
  SetFunction f(1);
  f.set(0b1, 0.7);
  auto verts = enumerate_vertices(f);
  REQUIRE(verts.size() == 1);
  CHECK(verts[0][0] == doctest::Approx(0.7));
}

TEST_CASE("vertices satisfy all constraints and lie on the sum-rate face") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    auto f = random_submodular(3, rng);
    for (const auto& r : enumerate_vertices(f)) {
      double sum = r[0] + r[1] + r[2];
      CHECK(std::abs(sum - f(0b111)) <= 1e-12);
      for (SubsetMask s = 1; s <= 0b111u; ++s) {
        double rs = 0;
        for (int u = 1; u <= 3; ++u)
          if (contains(s, u)) rs += r[u - 1];
        CHECK(rs <= f(s) + 1e-12);
      }
    }
  }
}

TEST_CASE("weighted maximum with unit weights equals the intersection sum") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 100; ++rep) {
    auto f1 = random_submodular(2, rng);
    auto f2 = random_submodular(2, rng);
    auto v = intersect_max_sum(f1, f2);
    auto w = max_weighted_sum_on_intersection(f1, f2, {1.0, 1.0});
    CHECK(w.value == doctest::Approx(v.max_sum).epsilon(1e-9));
  }
}

TEST_CASE("weighted maximum on a box region picks the corner") {
  auto f = make2(0.8, 1.3, 2.1);  // modular: sum constraint slack
  auto w = max_weighted_sum_on_intersection(f, f, {1.0, 2.0});
  CHECK(w.rates[0] == doctest::Approx(0.8));
  CHECK(w.rates[1] == doctest::Approx(1.3));
  CHECK(w.value == doctest::Approx(0.8 + 2 * 1.3));
}

TEST_CASE("weighted maximum matches a dense grid oracle") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 10; ++rep) {
    auto f1 = random_submodular(2, rng);
    auto f2 = random_submodular(2, rng);
    std::vector<double> mu{1.0, 3.0};
    auto w = max_weighted_sum_on_intersection(f1, f2, mu);
    double b1 = std::min(f1(0b01), f2(0b01));
    double b2 = std::min(f1(0b10), f2(0b10));
    double best = 0;
    const int steps = 1200;
    for (int i = 0; i <= steps; ++i) {
      double r1 = b1 * i / steps;
      for (int j = 0; j <= steps; ++j) {
        double r2 = b2 * j / steps;
        if (r1 + r2 > std::min(f1(0b11), f2(0b11))) continue;
        best = std::max(best, mu[0] * r1 + mu[1] * r2);
      }
    }
    CHECK(w.value >= best - 1e-12);
    CHECK(w.value <= best + 1e-3 * std::max(1.0, best) + 5e-3);
  }
}

TEST_CASE("weighted maximum rejects non-positive weights and K mismatch") {
  auto f = make2(1, 1, 1.5);
  CHECK_THROWS(max_weighted_sum_on_intersection(f, f, {1.0, 0.0}));
  SetFunction g(3);
  CHECK_THROWS(intersect_max_sum(f, g));
}

TEST_CASE("set function text round-trip") {
  auto f = make2(0.25, 1.75, 1.9375);
  auto g = SetFunction::from_text(f.to_text());
  REQUIRE(g.user_count() == 2);
  for (SubsetMask s = 1; s <= 0b11u; ++s) CHECK(g(s) == f(s));
}
