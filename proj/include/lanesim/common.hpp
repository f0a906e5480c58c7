#pragma once

#include <cstdint>
#include <cstring>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lanesim {

// Invalid configuration / user input. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runtime failure (I/O, numerics). The CLI maps this to exit code 1.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Wrap angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

inline uint64_t splitmix64_next(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Stateless mix of a seed with up to three stream tags. Used to derive
// independent per-item RNG streams so results do not depend on evaluation
// order (required for deterministic parallel sample generation).
inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  uint64_t s = seed;
  s = splitmix64_next(s) ^ (a + 0x9e3779b97f4a7c15ull);
  s = splitmix64_next(s) ^ (b + 0xb5297a4d3a2d9787ull);
  s = splitmix64_next(s) ^ (c + 0x68e31da4bb1a9ed1ull);
  return splitmix64_next(s);
}

// Deterministic RNG. Hand-rolled draws (not std::uniform_*_distribution,
// whose output is implementation-defined) so files regenerate bit-exactly
// on any platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64_next(state_); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  // Standard normal via Box-Muller. Always consumes exactly two draws so a
  // call sequence's state trajectory is independent of caching.
  double normal() {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Unbiased integer in [0, n) by rejection.
  uint64_t below(uint64_t n) {
    if (n == 0) throw RuntimeError("Rng::below: n must be positive");
    uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

 private:
  uint64_t state_;
};

// Seeded Fisher-Yates permutation of [0, n).
inline std::vector<uint64_t> random_permutation(uint64_t n, uint64_t seed) {
  std::vector<uint64_t> p(n);
  for (uint64_t i = 0; i < n; ++i) p[i] = i;
  Rng rng(mix_seed(seed, 0x7065726d757465ull));
  for (uint64_t i = n; i > 1; --i) {
    uint64_t j = rng.below(i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

inline uint64_t fnv1a64(const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

std::string to_hex16(uint64_t v);

// Fixed-format float printing used by every text artifact. 12 significant
// digits round-trip stably through parse + reprint, which keeps rewritten
// artifacts bit-identical.
std::string format_double(double v);

}  // namespace lanesim
