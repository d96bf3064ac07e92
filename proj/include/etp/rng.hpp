// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random numbers (SplitMix64 finalizer in counter mode). The
// stream key is splitmix64(seed) XOR stream id, so nearby seeds do not share
// streams. The k-th draw is a pure function of (key, k), so sample i of a
// campaign is the same no matter which worker produces it or in what order.
// Normal variates use Box-Muller with std math only (no distribution
// classes, whose output is implementation-defined).

#ifndef ETP_RNG_HPP
#define ETP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace etp {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(splitmix64(splitmix64(seed) ^ stream)) {}

  std::uint64_t next_u64() { return splitmix64(key_ ^ splitmix64(counter_++)); }

  /// Uniform in (0, 1), never exactly 0 or 1.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace etp

#endif  // ETP_RNG_HPP
