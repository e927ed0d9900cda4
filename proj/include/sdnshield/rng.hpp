#pragma once

#include <cstdint>
#include <string_view>

namespace sdnshield {

// Derives a child seed from a parent seed and a stream name. Used to give
// every consumer (traffic generation, weight init, dropout, splits, ...) its
// own independent stream so that adding draws in one place never shifts the
// values seen by another.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);

// Deterministic 64-bit generator (splitmix64). Not cryptographic; chosen for
// portability: the sequence is identical across platforms and compilers,
// which keeps replays byte-identical.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed), seed_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double();

  // Uniform in [lo, hi). Requires lo <= hi.
  double uniform(double lo, double hi);

  // Uniform integer in [0, n). Requires n > 0.
  std::uint64_t below(std::uint64_t n);

  // Exponential with the given rate (events per unit time). Requires rate > 0.
  double exponential(double rate);

  // Child generator seeded from this generator's construction seed and a
  // stream name; independent of how many draws were made here.
  Rng substream(std::string_view stream) const {
    return Rng(derive_seed(seed_, stream));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t state_;
  std::uint64_t seed_;
};

}  // namespace sdnshield
