#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "lanesim/common.hpp"

using namespace lanesim;

TEST_SUITE("common") {

TEST_CASE("mix_seed is deterministic and argument-sensitive") {
  CHECK(mix_seed(1, 2, 3) == mix_seed(1, 2, 3));
  CHECK(mix_seed(1, 2, 3) != mix_seed(1, 2, 4));
  CHECK(mix_seed(1, 2, 3) != mix_seed(1, 3, 2));
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
  CHECK(mix_seed(0, 0) != mix_seed(0, 1));
  // Distinct streams over a block of tags: no collisions in a small scan.
  std::set<uint64_t> seen;
  for (uint64_t a = 0; a < 64; ++a)
    for (uint64_t b = 0; b < 64; ++b) seen.insert(mix_seed(42, a, b));
  CHECK(seen.size() == 64 * 64);
}

TEST_CASE("uniform01 stays in [0,1) with a plausible mean") {
  Rng rng(123);
  double sum = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("uniform(a,b) respects its range") {
  Rng rng(7);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-2.5, 4.0);
    REQUIRE(v >= -2.5);
    REQUIRE(v < 4.0);
  }
}

TEST_CASE("normal has near-unit variance") {
  Rng rng(99);
  double sum = 0, sq = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("below covers [0,n) without bias toward 0") {
  Rng rng(5);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) ++hist[rng.below(7)];
  for (int c : hist) CHECK(std::abs(c - 10000) < 500);
  CHECK_THROWS_AS(rng.below(0), RuntimeError);
}

TEST_CASE("random_permutation is a permutation and depends on the seed") {
  const auto p = random_permutation(257, 11);
  REQUIRE(p.size() == 257);
  std::set<uint64_t> uniq(p.begin(), p.end());
  CHECK(uniq.size() == 257);
  CHECK(*uniq.begin() == 0);
  CHECK(*uniq.rbegin() == 256);
  CHECK(random_permutation(257, 11) == p);
  CHECK(random_permutation(257, 12) != p);
  CHECK(random_permutation(0, 1).empty());
  CHECK(random_permutation(1, 1) == std::vector<uint64_t>{0});
}

TEST_CASE("fnv1a64 matches the reference constants") {
  // Offset basis and the published FNV-1a test vector for "a".
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("hello") != fnv1a64("hellp"));
}

TEST_CASE("wrap_angle lands in (-pi, pi]") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(2 * kPi + 0.25) == doctest::Approx(0.25));
  CHECK(wrap_angle(-7 * kPi - 0.25) == doctest::Approx(kPi - 0.25));
  for (double a = -20.0; a <= 20.0; a += 0.173) {
    const double w = wrap_angle(a);
    REQUIRE(w > -kPi - 1e-15);
    REQUIRE(w <= kPi + 1e-15);
    CHECK(std::abs(std::sin(w) - std::sin(a)) < 1e-12);
    CHECK(std::abs(std::cos(w) - std::cos(a)) < 1e-12);
  }
}

TEST_CASE("format_double parses back to the exact same value") {
  Rng rng(2024);
  for (int i = 0; i < 2000; ++i) {
    const double v = (rng.uniform01() - 0.5) * std::pow(10.0, rng.uniform(-6, 6));
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
    CHECK(format_double(std::stod(s)) == s);
  }
  // Values needing all 17 digits still survive.
  CHECK(std::stod(format_double(0.1 + 0.2)) == 0.1 + 0.2);
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.05) == "0.05");
}

TEST_CASE("to_hex16 is 16 lowercase hex digits") {
  CHECK(to_hex16(0) == "0000000000000000");
  CHECK(to_hex16(0xdeadbeef12345678ull) == "deadbeef12345678");
}

}  // TEST_SUITE
