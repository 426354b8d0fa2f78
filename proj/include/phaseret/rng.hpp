#pragma once

#include <complex>
#include <cstdint>

namespace phaseret {

// SplitMix64 (Steele, Lea & Flood, "Fast splittable pseudorandom number
// generators", OOPSLA 2014). One 64-bit word of state, output mixed with
// two xor-shift-multiply rounds. Chosen because the whole algorithm fits
// in a comment and reproduces exactly in any language:
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
//
// Uniform doubles take the top 53 bits: (next_u64() >> 11) * 2^-53.
// Normals use the Box-Muller transform on (u1, u2] pairs; complex standard
// normals are (g1 + i*g2) / sqrt(2), so E|z|^2 = 1.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next_u64() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 random bits.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Independent child stream; deterministic function of the parent state.
  SplitMix64 split() noexcept { return SplitMix64(next_u64()); }

  // Standard normal pair via Box-Muller. u1 is mapped into (0, 1] so the
  // logarithm is always finite.
  void next_normal_pair(double& g1, double& g2) noexcept {
    const double u1 = 1.0 - next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * pi_ * u2;
    g1 = r * std::cos(t);
    g2 = r * std::sin(t);
  }

  double next_normal() noexcept {
    double g1, g2;
    next_normal_pair(g1, g2);
    return g1;
  }

  // Complex standard normal: unit second moment, isotropic phase.
  std::complex<double> next_complex_normal() noexcept {
    double g1, g2;
    next_normal_pair(g1, g2);
    return {g1 * inv_sqrt2_, g2 * inv_sqrt2_};
  }

 private:
  static constexpr double pi_ = 3.141592653589793238462643383279502884;
  static constexpr double inv_sqrt2_ = 0.70710678118654752440084436210485;
  std::uint64_t state_;
};

}  // namespace phaseret
