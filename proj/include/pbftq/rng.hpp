#pragma once

#include <cmath>
#include <cstdint>

namespace pbftq {

/// SplitMix64 (Steele, Lea and Flood 2014): a 64-bit counter advanced by the
/// golden-ratio increment 0x9e3779b97f4a7c15 and passed through a fixed
/// mixing function. Any implementation of the same algorithm reproduces the
/// stream from the seed alone.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Exponential with the given rate, by inversion: -log(1 - U) / rate.
  double exponential(double rate) noexcept {
    return -std::log1p(-uniform()) / rate;
  }

 private:
  std::uint64_t state_;
};

/// Derives an independent seed for stream `index` from a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  SplitMix64 mix(base ^ (index * 0xd1b54a32d192ed03ULL));
  return mix();
}

}  // namespace pbftq
