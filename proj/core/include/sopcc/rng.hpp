#pragma once

#include <cmath>
#include <cstdint>

namespace sopcc {

/// Seeded counter/stream random generator (xoshiro256** with splitmix64 init).
///
/// The same (seed, stream) pair always produces the same sequence; distinct
/// streams give statistically independent sequences, so parallel workers can
/// each own stream = worker/trial index without coordination.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t x = seed ^ (stream * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
    for (auto& s : state_) s = splitmix64(x);
  }

  std::uint64_t nextU64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

  /// Uniform in the open interval (0, 1).
  double uniformOpen() {
    return (static_cast<double>(nextU64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be positive.
  int uniformInt(int n) { return static_cast<int>(nextU64() % static_cast<std::uint64_t>(n)); }

  /// Exponential draw with the given mean; strictly positive.
  double exponential(double mean) { return -mean * std::log(uniformOpen()); }

  /// Gaussian draw (Box-Muller), mean 0, given standard deviation.
  double gaussian(double stddev) {
    const double u = uniformOpen();
    const double v = uniformOpen();
    return stddev * std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586 * v);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_[4];
};

}  // namespace sopcc
