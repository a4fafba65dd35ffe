#pragma once

#include <cmath>
#include <cstdint>

namespace mrvcg {

// SplitMix64. Chosen because its output sequence is fully specified by the
// algorithm (no implementation-defined behaviour, unlike the standard
// distributions), so seeded data generation reproduces bit for bit across
// compilers and platforms.
//
// Stream splitting: child_stream(k) is seeded with the master stream's k-th
// output, which SplitMix64 admits in closed form. Child streams are used one
// per generated client so that inserting or removing clients never shifts
// the draws of the others.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGamma;
    return finalize(state_);
  }

  // Uniform on [0, 1), 53 bits of precision.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]. Safe to feed into std::log.
  double next_double_pos() { return 1.0 - next_double(); }

  // Standard normal deviate via Box-Muller. Consumes two uniforms.
  double next_normal() {
    const double u1 = next_double_pos();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // The k-th output of this generator's current state, without advancing.
  // next_u64() called k+1 times from here would return it last.
  std::uint64_t peek(std::uint64_t k) const {
    return finalize(state_ + (k + 1) * kGamma);
  }

  // Independent child stream number k (0-based). See class comment.
  SplitMix64 child_stream(std::uint64_t k) const { return SplitMix64(peek(k)); }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  static std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace mrvcg
