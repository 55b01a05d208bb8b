#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace trustdyn {

/// Derives an independent substream seed from a root seed and a stream index.
/// Simulations that run many rollouts in parallel give each rollout its own
/// stream, so results do not depend on execution order.
inline std::uint64_t substream_seed(std::uint64_t root, std::uint64_t index) {
  // splitmix64 finalizer over the (root, index) pair
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Explicitly seeded random stream. The draw sequence is a pure function of
/// the seed, which makes every simulation reproducible from (inputs, seed).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// A double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the paired draw is cached.
  double standard_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Zero-mean normal with the given standard deviation.
  double normal(double stddev) { return stddev * standard_normal(); }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace trustdyn
