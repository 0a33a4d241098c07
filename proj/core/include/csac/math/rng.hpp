#pragma once

#include <cstdint>
#include <random>

namespace csac::math {

/// Seeded pseudo-random source. Identical seed and call sequence give an
/// identical stream. `derive` produces independent child streams so that
/// actors and learners never share a generator.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0) : seed_(seed), engine_(mix(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t draws() const noexcept { return draws_; }

  SeededRng derive(std::uint64_t stream) const { return SeededRng(mix(seed_ ^ mix(stream + 1))); }

  double uniform() { return uniform(0.0, 1.0); }
  double uniform(double lo, double hi) {
    ++draws_;
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double stddev = 1.0) {
    ++draws_;
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  std::uint64_t poisson(double mean) {
    ++draws_;
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<std::uint64_t>(mean)(engine_);
  }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    ++draws_;
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() noexcept { return engine_; }

  // splitmix64 finalizer
  static constexpr std::uint64_t mix(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t draws_ = 0;
  std::mt19937_64 engine_;
};

}  // namespace csac::math
