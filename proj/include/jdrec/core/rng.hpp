#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace jdrec {

// Seeded random source with platform-independent draws.
//
// std::mt19937_64 is fully specified by the standard, but the std::*_distribution
// adaptors are not, so the conversions to real/integer/normal values live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent sub-stream derived from a root seed and a stream name
  // ("data", "init", "sampling", "clicks", ...).
  static Rng stream(std::uint64_t seed, std::string_view name);

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  // Standard normal via Box-Muller (no cached second value).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t seed, std::string_view name) noexcept;

}  // namespace jdrec
