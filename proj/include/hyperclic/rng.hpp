#pragma once

#include <cstdint>
#include <random>

// Deterministic sampling on top of std::mt19937_64. The distributions are
// implemented here (not std::*_distribution) so that a fixed seed produces
// the same stream on every standard library.

namespace hyperclic::rng {

// splitmix64 mix of a master seed with a stream tag; used to derive
// independent sub-seeds for data generation, embedding, training, ...
std::uint64_t mix(std::uint64_t seed, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // uniform in [0, 1)
  double uniform();
  // uniform in [lo, hi)
  double uniform(double lo, double hi);
  // standard normal (Box-Muller, caches the second draw)
  double normal();
  // unbiased uniform integer in [0, n); n must be > 0
  std::size_t below(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace hyperclic::rng
