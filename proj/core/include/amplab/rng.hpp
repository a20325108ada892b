#pragma once

#include <cstdint>

namespace amplab {

// 64-bit avalanche finalizer (the splitmix64 mixing function).
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// SplitMix64: a seedable counter-based generator. The internal state is a
/// plain counter advanced by a fixed odd constant; every output is the
/// avalanche hash of the counter. Gaussian variates use the Box-Muller
/// transform with the spare value cached. Both choices are fixed: golden
/// fixtures depend on the exact output stream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t operator()() { return next(); }

  // Uniform double in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1]; never returns 0 so log() below is safe.
  double next_double_open() {
    return static_cast<double>((next() >> 11) + 1ULL) * 0x1.0p-53;
  }

  // Standard normal variate (Box-Muller).
  double next_gaussian();

  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~0ULL; }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum class Stream : std::uint64_t {
  Matrix = 1,
  Signal = 2,
  Noise = 3,
};

/// Seeding plan for one Monte Carlo trial. Per-stream substreams are derived
/// by chaining the master seed, the trial index, and a stream label through
/// the avalanche hash, so distinct (trial, stream) pairs get distinct seeds
/// and trials can run in parallel without coordination.
struct SeedPlan {
  std::uint64_t master_seed = 0;
  std::uint64_t trial_index = 0;

  std::uint64_t derive(Stream stream) const {
    std::uint64_t h = mix64(master_seed);
    h = mix64(h ^ (trial_index + 0x85ebca6b0f4a7c15ULL));
    h = mix64(h ^ static_cast<std::uint64_t>(stream));
    return h;
  }

  SplitMix64 generator(Stream stream) const { return SplitMix64(derive(stream)); }
};

}  // namespace amplab
