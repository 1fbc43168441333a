#pragma once

#include <cstdint>
#include <random>

namespace phaselab {

/// Seeded random source used by every generator in the library.
///
/// Uniform bits come from std::mt19937_64, whose output sequence is fixed by
/// the C++ standard. Doubles are built from the top 53 bits and Gaussians use
/// the Box-Muller transform (both sines are consumed, the second cached), so a
/// given seed yields the same stream on every conforming toolchain.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform on (0, 1], safe as a log() argument.
  double uniform_open();

  double normal();

  std::uint64_t bits() { return engine_(); }

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 finalizer; mixes a base seed with a stream index so that
/// per-trial or per-run generators are decorrelated.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace phaselab
