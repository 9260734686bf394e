#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace coop {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/*! \brief Counter-based random stream.
 *
 * The stream is a pure function of (seed, stream index, draw counter), so trial k of a
 * Monte Carlo run produces the same numbers no matter which thread evaluates it.
 */
class CounterRng {
public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(mix64(mix64(seed + kGamma) ^ mix64(stream * kGamma + 0x632BE59BD9B4E019ULL)))
  {}

  std::uint64_t next_u64() noexcept
  {
    ++counter_;
    return mix64(key_ + counter_ * kGamma);
  }

  // Uniform on (0, 1], 53-bit resolution.
  double uniform() noexcept
  {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Circularly-symmetric complex Gaussian with unit variance (each part has variance 1/2).
  std::complex<double> complex_normal() noexcept
  {
    const double radius = std::sqrt(-std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    return std::polar(radius, angle);
  }

  std::uint64_t draws() const noexcept { return counter_; }

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

} // namespace coop
