#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace wealthflow {

// SplitMix64 finalizer; maps (seed, stream) to well-separated engine seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Deterministic random stream: a 64-bit Mersenne Twister with ziggurat
/// normals (Boost.Random). The normal sampler keeps no cached value, so every
/// call to normal() consumes engine output for exactly one variate and two
/// streams built from the same (seed, stream) pair produce identical draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(derive_seed(seed, stream)) {}

  double normal() { return normal_(engine_); }

  // Uniform on the open interval (0, 1).
  double uniform() {
    double u;
    do {
      u = uniform_(engine_);
    } while (u <= 0.0);
    return u;
  }

  std::uint64_t next() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};
  boost::random::uniform_01<double> uniform_;
};

}  // namespace wealthflow
