#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "coalsim/random.hpp"
#include "coalsim/rates.hpp"

namespace coalsim {

/// One merger of the block-counting chain.
struct Jump {
  std::int64_t x_before = 0;  // blocks before the merger
  std::int64_t k = 0;         // blocks merged
  double w = 0.0;             // holding time before the merger
  std::int64_t dy = 0;        // singletons absorbed
  double t_jump = 0.0;        // absolute time of the merger
  bool operator==(const Jump&) const = default;
};

struct CoalescentPath {
  std::int64_t n = 0;
  std::vector<Jump> jumps;
  std::uint64_t seed = 0;

  std::int64_t tau() const noexcept { return static_cast<std::int64_t>(jumps.size()); }
  double absorption_time() const noexcept { return jumps.empty() ? 0.0 : jumps.back().t_jump; }
  bool operator==(const CoalescentPath&) const = default;
};

/// Multiset of external branch lengths: ascending distinct lengths with
/// multiplicities summing to n.
struct ExternalLengths {
  std::int64_t n = 0;
  std::vector<std::pair<double, std::int64_t>> entries;

  /// All n lengths in ascending order.
  std::vector<double> values() const;
  double max() const;
  /// The `count` largest lengths in descending order (fewer if n < count).
  std::vector<double> largest(std::size_t count) const;
  /// i-th smallest length, 0-based.
  double at_rank(std::int64_t i) const;
  /// Number of lengths strictly greater than x.
  std::int64_t count_above(double x) const;
};

/// Labeled run of the partition process on {0,...,n-1}; blocks are leaf
/// bitmasks. partitions[0] is the initial partition at time 0 and
/// partitions[j] the state right after the merger at times[j].
struct LabeledRun {
  std::vector<double> times;
  std::vector<std::vector<std::uint32_t>> partitions;
  std::vector<double> lengths;  // T_i^n for leaf i
};

struct ChainOptions {
  bool track_singletons = true;
  /// Stop before the first merger after this time.
  double stop_time = std::numeric_limits<double>::infinity();
  /// Stop once the block count is at most this level.
  std::int64_t stop_blocks = 1;
};

/// Samples the block-counting chain of a Λ-coalescent started from n <= n_max
/// blocks. Holding times are exponential with the total jump rate; merger
/// sizes come from a mixture over the measure's components (Kingman part,
/// atoms, power-beta densities) with closed-form or sequential inverse-CDF
/// draws; user densities fall back to cached explicit distributions.
///
/// Const methods are thread-safe; each call owns its Rng.
class Simulator {
 public:
  Simulator(std::shared_ptr<const RateFunctions> rates, std::int64_t n_max);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  const RateFunctions& rates() const noexcept { return *rates_; }
  std::int64_t n_max() const noexcept { return n_max_; }

  double total_rate(std::int64_t b) const;
  std::int64_t sample_merger_size(std::int64_t b, Rng& rng) const;

  /// Runs the chain from n blocks, calling visit(jump) after every merger
  /// until visit returns false, the options' stop rule fires, or one block
  /// is left. Draw order per merger: holding time, merger size, singleton
  /// decrement.
  template <class Visitor>
  void run_chain(std::int64_t n, Rng& rng, Visitor&& visit, const ChainOptions& opts = {}) const;

  CoalescentPath simulate_path(std::int64_t n, std::uint64_t seed) const;
  /// Labeled brute-force mode; n <= 12.
  LabeledRun simulate_labeled(std::int64_t n, std::uint64_t seed) const;

 private:
  struct Component;
  struct Generic;

  std::shared_ptr<const RateFunctions> rates_;
  std::int64_t n_max_;
  std::vector<Component> components_;
  std::unique_ptr<Generic> generic_;
};

template <class Visitor>
void Simulator::run_chain(std::int64_t n, Rng& rng, Visitor&& visit, const ChainOptions& opts) const {
  if (n < 2 || n > n_max_) throw DomainError("run_chain requires 2 <= n <= n_max");
  std::int64_t b = n;
  std::int64_t y = n;
  double t = 0.0;
  while (b > std::max<std::int64_t>(opts.stop_blocks, 1)) {
    const double w = rng.exponential(total_rate(b));
    if (t + w > opts.stop_time) break;
    t += w;
    const std::int64_t k = sample_merger_size(b, rng);
    const std::int64_t dy = opts.track_singletons ? sample_hypergeometric(rng, b, y, k) : 0;
    const Jump jump{b, k, w, dy, t};
    b -= k - 1;
    y -= dy;
    if (!visit(jump)) break;
  }
}

ExternalLengths external_lengths(const CoalescentPath& path);

/// N_n(t): blocks at time t (right-continuous; 1 after absorption).
std::int64_t block_count_at(const CoalescentPath& path, double t);
/// M_n(t): singleton blocks at time t.
std::int64_t singleton_count_at(const CoalescentPath& path, double t);

struct StoppingTimes {
  std::int64_t rho = 0;     // first chain index j with X_j <= r
  double rho_tilde = 0.0;   // first time with N_n(t) <= r
};
StoppingTimes stopping_times(const CoalescentPath& path, double r_level);

/// Block counts X_0 = n, X_1, ..., X_tau along the path.
std::vector<std::int64_t> block_counts(const CoalescentPath& path);

/// E[(Y_ρ)_r | N_n] = (X_ρ)_r Π_{j=1}^{ρ} (1 - r/X_j) along the realized chain.
double conditional_factorial_moment(const CoalescentPath& path, std::int64_t rho_index, int r);

}  // namespace coalsim
