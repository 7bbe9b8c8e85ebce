#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace crossgan {

/// Seeded random source with platform-independent draws.
///
/// std::mt19937_64 has a standardized output sequence, but the standard
/// distributions do not, so uniform and normal variates are derived here
/// directly from the engine bits.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller; no cached second variate, so the state
  /// is exactly the engine state.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Textual engine state (the standard's stream format for the engine).
  std::string state() const;
  void set_state(const std::string& state);

  friend bool operator==(const Rng& a, const Rng& b) {
    return a.engine_ == b.engine_;
  }

 private:
  std::mt19937_64 engine_;
};

/// Derives an independent seed for a named sub-stream (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace crossgan
