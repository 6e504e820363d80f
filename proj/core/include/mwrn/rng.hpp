#pragma once

#include <cstdint>
#include <random>

namespace mwrn {

// Deterministic random source. std::mt19937_64 is fully specified by the
// standard, and every derived draw below is computed with explicit arithmetic
// (no std::*_distribution, whose outputs are implementation-defined), so a
// seed reproduces the same stream on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53 bits of mantissa.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi] inclusive. Uses the 128-bit multiply trick; the bias
  // is < 2^-64 per draw, far below anything the tests can resolve.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(gen_()) * range;
    return lo + static_cast<std::int64_t>(wide >> 64);
  }

  // Standard normal via Box-Muller. The spare value is cached, so draws come
  // in deterministic pairs.
  double normal();

  // Uniform on [-bound, bound].
  double symmetric_uniform(double bound) {
    return (2.0 * uniform01() - 1.0) * bound;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stable stream derivation (splitmix64 finalizer) so that subsystems seeded
// from one user seed do not share streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mwrn
