#ifndef OFESI_RNG_HPP
#define OFESI_RNG_HPP

#include <cstdint>
#include <string_view>

namespace ofesi {

/// SplitMix64 (Steele, Lea, Flood 2014). Chosen over <random> engines because
/// the standard distributions are not specified bit-for-bit across library
/// implementations; every draw here is defined by the code below.
///
///   next():        state += 0x9E3779B97F4A7C15; return mix(state)
///   uniform():     (next() >> 11) * 2^-53, in [0, 1)
///   below(n):      rejection sampling on next() for an unbiased value in [0, n)
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be positive.
  constexpr std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }

  constexpr bool coin() noexcept { return (next() >> 63) != 0; }

 private:
  std::uint64_t state_;
};

/// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Child seed for an independent stream: mix(base ^ mix(salt + golden)).
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept {
  return SplitMix64::mix(base ^ SplitMix64::mix(salt + 0x9E3779B97F4A7C15ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view salt) noexcept {
  return derive_seed(base, fnv1a64(salt));
}

}  // namespace ofesi

#endif  // OFESI_RNG_HPP
