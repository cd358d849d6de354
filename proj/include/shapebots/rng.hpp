#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace shapebots {

/// Streams separate independent random purposes so that draws never depend
/// on iteration order.
enum class RngPurpose : std::uint32_t {
  TrackingLoss = 1,
  DropoutLength = 2,
  PositionNoise = 3,
  ActuatorNoise = 4,
  ScenarioLayout = 5,
  Test = 99,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stateless counter-based generator: every value is a pure function of
/// (seed, stream, counter).
class CounterRng {
 public:
  constexpr explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  static constexpr std::uint64_t stream(RngPurpose purpose, std::uint64_t entity) noexcept {
    return (static_cast<std::uint64_t>(purpose) << 40) ^ entity;
  }

  constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t counter) const noexcept {
    return splitmix64(splitmix64(splitmix64(seed_) ^ stream) ^ counter);
  }

  /// Uniform in [0, 1).
  double uniform(std::uint64_t stream, std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(stream, counter) >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on two consecutive sub-counters.
  double normal(std::uint64_t stream, std::uint64_t counter) const noexcept {
    const double u1 = 1.0 - uniform(stream, 2 * counter);  // (0, 1]
    const double u2 = uniform(stream, 2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Sequential convenience wrapper over CounterRng for test and layout code.
class RngSequence {
 public:
  RngSequence(std::uint64_t seed, std::uint64_t stream) : rng_(seed), stream_(stream) {}
  double uniform() { return rng_.uniform(stream_, counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return rng_.normal(stream_, counter_++); }
  std::uint64_t below(std::uint64_t n) { return rng_.bits(stream_, counter_++) % n; }

 private:
  CounterRng rng_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace shapebots
