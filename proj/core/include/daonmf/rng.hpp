#pragma once

#include <cstdint>
#include <random>

namespace daonmf {

// splitmix64 finalizer; derives independent stream seeds from (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// Portable random source: mt19937_64 bits mapped to doubles by hand so that
// outputs are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }
  // Uniform on [0, 1).
  double uniform();
  // Uniform on (lo, hi].
  double uniform_open_closed(double lo, double hi);
  double normal();
  // Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace daonmf
