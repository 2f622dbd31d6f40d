#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace coalsim {

/// 64-bit Mersenne twister with the few variate helpers the simulator needs.
/// The helpers are written out so that streams do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0,1), 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on the open interval (0,1).
  double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double exponential(double rate) { return -std::log(uniform_open()) / rate; }
  /// Uniform integer in [0, n), unbiased (rejection on the top bits).
  std::uint64_t below(std::uint64_t n);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Seed of replication i of an experiment with base seed `base`.
inline std::uint64_t replication_seed(std::uint64_t base, std::uint64_t i) { return base ^ i; }

/// Number of marked items among `draws` items taken without replacement from
/// a population of `population` items of which `marked` are marked.
/// Inverse transform when the (complement-reduced) draw count is at most 32,
/// ratio-of-uniforms (HRUA) otherwise.
std::int64_t sample_hypergeometric(Rng& rng, std::int64_t population, std::int64_t marked,
                                   std::int64_t draws);

}  // namespace coalsim
