#include "coalsim/sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <list>
#include <numeric>
#include <unordered_map>

#include "coalsim/numerics.hpp"

namespace coalsim {

struct Simulator::Component {
  enum class Kind { kingman, dirac, bolthausen_sznitman, power_beta };
  Kind kind = Kind::kingman;
  double mass = 0.0;
  double p = 0.0;
  PowerBeta pb{};
  std::vector<double> rate;  // power-beta total rate indexed by b

  double total(std::int64_t b) const {
    const double bd = static_cast<double>(b);
    switch (kind) {
      case Kind::kingman: return mass * 0.5 * bd * (bd - 1.0);
      case Kind::dirac: return mass * kernels::binomial_ge2_over_p2(bd, p);
      case Kind::bolthausen_sznitman: return pb.c * (bd - 1.0);
      case Kind::power_beta: return rate[static_cast<std::size_t>(b)];
    }
    return 0.0;
  }

  std::int64_t sample(std::int64_t b, Rng& rng) const {
    switch (kind) {
      case Kind::kingman: return 2;
      case Kind::dirac: return sample_dirac(b, rng);
      case Kind::bolthausen_sznitman: {
        // P(K=k) = b/((b-1)k(k-1)), so P(K<=k) = b(1-1/k)/(b-1).
        const double bd = static_cast<double>(b);
        const double v = rng.uniform() * (bd - 1.0) / bd;
        const double k = std::ceil(1.0 / (1.0 - v));
        return std::clamp<std::int64_t>(static_cast<std::int64_t>(k), 2, b);
      }
      case Kind::power_beta: return sample_power_beta(b, rng);
    }
    return 2;
  }

  std::int64_t sample_dirac(std::int64_t b, Rng& rng) const {
    if (p >= 1.0) return b;
    const double bd = static_cast<double>(b);
    const double at_least_two = p * p * kernels::binomial_ge2_over_p2(bd, p);
    const double log_q = std::log1p(-p);
    if (at_least_two > 0.25) {
      // Bin(b,p) from geometric gaps between successes, rejected until >= 2.
      for (;;) {
        std::int64_t count = 0;
        double position = 0.0;
        for (;;) {
          position += std::floor(std::log(rng.uniform_open()) / log_q) + 1.0;
          if (position > bd) break;
          ++count;
        }
        if (count >= 2) return count;
      }
    }
    double pmf = std::exp(log_binomial(bd, 2.0) + 2.0 * std::log(p) + (bd - 2.0) * log_q -
                          std::log(at_least_two));
    const double odds = p / (1.0 - p);
    double u = rng.uniform();
    for (std::int64_t k = 2; k < b; ++k) {
      if (u < pmf) return k;
      u -= pmf;
      pmf *= static_cast<double>(b - k) / static_cast<double>(k + 1) * odds;
    }
    return b;
  }

  std::int64_t sample_power_beta(std::int64_t b, Rng& rng) const {
    const double bd = static_cast<double>(b);
    // Weight of k=2 is C(b,2) c B(a, b-2+b'); consecutive weights differ by
    // (b-k)/(k+1) * (k+a-2)/(b-k-1+b').
    double w = pb.c * std::exp(log_binomial(bd, 2.0) + log_beta(pb.a, bd - 2.0 + pb.b)) / total(b);
    double u = rng.uniform();
    for (std::int64_t k = 2; k < b; ++k) {
      if (u < w) return k;
      u -= w;
      const double kd = static_cast<double>(k);
      w *= (bd - kd) / (kd + 1.0) * (kd + pb.a - 2.0) / (bd - kd - 1.0 + pb.b);
    }
    return b;
  }
};

// Measures with user densities: explicit per-b distributions from the rates
// module, kept in a small LRU cache.
struct Simulator::Generic {
  struct Entry {
    double total = 0.0;
    std::vector<double> cdf;  // over k = 2..b
  };
  static constexpr std::size_t kCapacity = 512;

  const RateFunctions* rates = nullptr;
  mutable std::mutex mutex;
  mutable std::list<std::int64_t> order;  // most recent first
  mutable std::unordered_map<std::int64_t, std::pair<std::shared_ptr<const Entry>, std::list<std::int64_t>::iterator>>
      cache;

  std::shared_ptr<const Entry> get(std::int64_t b) const {
    {
      std::lock_guard lock(mutex);
      if (auto it = cache.find(b); it != cache.end()) {
        order.splice(order.begin(), order, it->second.second);
        return it->second.first;
      }
    }
    auto entry = std::make_shared<Entry>();
    entry->total = rates->total_jump_rate(b);
    entry->cdf = rates->merger_size_distribution(b);
    std::partial_sum(entry->cdf.begin(), entry->cdf.end(), entry->cdf.begin());
    std::lock_guard lock(mutex);
    if (auto it = cache.find(b); it != cache.end()) return it->second.first;
    order.push_front(b);
    cache.emplace(b, std::make_pair(entry, order.begin()));
    if (cache.size() > kCapacity) {
      cache.erase(order.back());
      order.pop_back();
    }
    return entry;
  }
};

Simulator::Simulator(std::shared_ptr<const RateFunctions> rates, std::int64_t n_max)
    : rates_(std::move(rates)), n_max_(n_max) {
  if (!rates_) throw DomainError("Simulator requires rate functions");
  if (n_max_ < 2) throw DomainError("Simulator requires n_max >= 2");
  const LambdaMeasure& m = rates_->measure();
  const bool closed =
      rates_->config().use_closed_forms &&
      std::all_of(m.densities().begin(), m.densities().end(),
                  [](const DensityTerm& t) { return std::holds_alternative<PowerBeta>(t); });
  if (!closed) {
    generic_ = std::make_unique<Generic>();
    generic_->rates = rates_.get();
    return;
  }
  if (m.atom_at_zero() > 0.0) {
    Component c;
    c.kind = Component::Kind::kingman;
    c.mass = m.atom_at_zero();
    components_.push_back(std::move(c));
  }
  for (const Atom& at : m.atoms()) {
    Component c;
    c.kind = Component::Kind::dirac;
    c.mass = at.mass;
    c.p = at.location;
    components_.push_back(std::move(c));
  }
  for (const auto& term : m.densities()) {
    const auto& pb = std::get<PowerBeta>(term);
    Component c;
    c.pb = pb;
    if (pb.a == 1.0 && pb.b == 1.0) {
      c.kind = Component::Kind::bolthausen_sznitman;
    } else {
      c.kind = Component::Kind::power_beta;
      // λ(b) = Σ_{j=2}^b (j-1) c B(a, j-2+b').
      c.rate.assign(static_cast<std::size_t>(n_max_) + 1, 0.0);
      double beta = std::exp(log_beta(pb.a, pb.b));
      double sum = 0.0;
      for (std::int64_t j = 2; j <= n_max_; ++j) {
        sum += static_cast<double>(j - 1) * beta;
        c.rate[static_cast<std::size_t>(j)] = pb.c * sum;
        const double mm = static_cast<double>(j - 2) + pb.b;
        beta *= mm / (pb.a + mm);
      }
    }
    components_.push_back(std::move(c));
  }
}

Simulator::~Simulator() = default;

double Simulator::total_rate(std::int64_t b) const {
  if (b < 2 || b > n_max_) throw DomainError("total_rate requires 2 <= b <= n_max");
  if (generic_) return generic_->get(b)->total;
  double out = 0.0;
  for (const Component& c : components_) out += c.total(b);
  return out;
}

std::int64_t Simulator::sample_merger_size(std::int64_t b, Rng& rng) const {
  if (b == 2) return 2;
  if (generic_) {
    const auto entry = generic_->get(b);
    const double u = rng.uniform() * entry->cdf.back();
    const auto it = std::upper_bound(entry->cdf.begin(), entry->cdf.end(), u);
    const auto idx = std::min<std::ptrdiff_t>(it - entry->cdf.begin(), static_cast<std::ptrdiff_t>(b - 2));
    return 2 + idx;
  }
  if (components_.size() == 1) return components_.front().sample(b, rng);
  double u = rng.uniform() * total_rate(b);
  for (std::size_t i = 0; i + 1 < components_.size(); ++i) {
    const double w = components_[i].total(b);
    if (u < w) return components_[i].sample(b, rng);
    u -= w;
  }
  return components_.back().sample(b, rng);
}

CoalescentPath Simulator::simulate_path(std::int64_t n, std::uint64_t seed) const {
  CoalescentPath path;
  path.n = n;
  path.seed = seed;
  Rng rng(seed);
  run_chain(n, rng, [&](const Jump& j) {
    path.jumps.push_back(j);
    return true;
  });
  return path;
}

LabeledRun Simulator::simulate_labeled(std::int64_t n, std::uint64_t seed) const {
  if (n < 2 || n > 12) throw DomainError("simulate_labeled requires 2 <= n <= 12");
  if (n > n_max_) throw DomainError("simulate_labeled requires n <= n_max");
  Rng rng(seed);
  LabeledRun run;
  std::vector<std::uint32_t> blocks(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) blocks[static_cast<std::size_t>(i)] = 1u << i;
  run.lengths.assign(static_cast<std::size_t>(n), 0.0);
  run.times.push_back(0.0);
  run.partitions.push_back(blocks);
  double t = 0.0;
  while (blocks.size() > 1) {
    const auto b = static_cast<std::int64_t>(blocks.size());
    t += rng.exponential(total_rate(b));
    const std::int64_t k = sample_merger_size(b, rng);
    // Partial Fisher-Yates: the first k slots become a uniform k-subset.
    for (std::int64_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(b - i)));
      std::swap(blocks[static_cast<std::size_t>(i)], blocks[static_cast<std::size_t>(j)]);
    }
    std::uint32_t merged = 0;
    for (std::int64_t i = 0; i < k; ++i) {
      const std::uint32_t block = blocks[static_cast<std::size_t>(i)];
      if (std::popcount(block) == 1) run.lengths[static_cast<std::size_t>(std::countr_zero(block))] = t;
      merged |= block;
    }
    blocks.erase(blocks.begin(), blocks.begin() + k);
    blocks.push_back(merged);
    std::sort(blocks.begin(), blocks.end());
    run.times.push_back(t);
    run.partitions.push_back(blocks);
  }
  return run;
}

std::vector<double> ExternalLengths::values() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (const auto& [len, mult] : entries) out.insert(out.end(), static_cast<std::size_t>(mult), len);
  return out;
}

double ExternalLengths::max() const { return entries.empty() ? 0.0 : entries.back().first; }

std::vector<double> ExternalLengths::largest(std::size_t count) const {
  std::vector<double> out;
  for (auto it = entries.rbegin(); it != entries.rend() && out.size() < count; ++it) {
    for (std::int64_t m = 0; m < it->second && out.size() < count; ++m) out.push_back(it->first);
  }
  return out;
}

double ExternalLengths::at_rank(std::int64_t i) const {
  if (i < 0 || i >= n) throw DomainError("ExternalLengths::at_rank out of range");
  for (const auto& [len, mult] : entries) {
    if (i < mult) return len;
    i -= mult;
  }
  return entries.back().first;
}

std::int64_t ExternalLengths::count_above(double x) const {
  std::int64_t out = 0;
  for (auto it = entries.rbegin(); it != entries.rend() && it->first > x; ++it) out += it->second;
  return out;
}

ExternalLengths external_lengths(const CoalescentPath& path) {
  ExternalLengths out;
  out.n = path.n;
  for (const Jump& j : path.jumps) {
    if (j.dy == 0) continue;
    if (!out.entries.empty() && out.entries.back().first == j.t_jump) {
      out.entries.back().second += j.dy;
    } else {
      out.entries.emplace_back(j.t_jump, j.dy);
    }
  }
  return out;
}

namespace {

// Number of mergers that have happened by time t.
std::size_t jumps_by(const CoalescentPath& path, double t) {
  const auto it = std::upper_bound(path.jumps.begin(), path.jumps.end(), t,
                                   [](double v, const Jump& j) { return v < j.t_jump; });
  return static_cast<std::size_t>(it - path.jumps.begin());
}

}  // namespace

std::int64_t block_count_at(const CoalescentPath& path, double t) {
  if (t < 0.0) throw DomainError("block_count_at requires t >= 0");
  const std::size_t m = jumps_by(path, t);
  if (m == 0) return path.n;
  const Jump& j = path.jumps[m - 1];
  return j.x_before - j.k + 1;
}

std::int64_t singleton_count_at(const CoalescentPath& path, double t) {
  if (t < 0.0) throw DomainError("singleton_count_at requires t >= 0");
  const std::size_t m = jumps_by(path, t);
  std::int64_t y = path.n;
  for (std::size_t i = 0; i < m; ++i) y -= path.jumps[i].dy;
  return y;
}

std::vector<std::int64_t> block_counts(const CoalescentPath& path) {
  std::vector<std::int64_t> out{path.n};
  for (const Jump& j : path.jumps) out.push_back(j.x_before - j.k + 1);
  return out;
}

StoppingTimes stopping_times(const CoalescentPath& path, double r_level) {
  if (!(r_level >= 1.0) || r_level > static_cast<double>(path.n)) {
    throw DomainError("stopping_times requires 1 <= r_level <= n");
  }
  if (static_cast<double>(path.n) <= r_level) return {0, 0.0};
  for (std::size_t i = 0; i < path.jumps.size(); ++i) {
    const Jump& j = path.jumps[i];
    if (static_cast<double>(j.x_before - j.k + 1) <= r_level) {
      return {static_cast<std::int64_t>(i + 1), j.t_jump};
    }
  }
  throw DomainError("stopping_times: path does not reach the level");
}

double conditional_factorial_moment(const CoalescentPath& path, std::int64_t rho_index, int r) {
  if (rho_index < 0 || rho_index > path.tau()) throw DomainError("rho_index outside [0, tau]");
  if (r < 1) throw DomainError("conditional_factorial_moment requires r >= 1");
  const auto x = block_counts(path);
  const double x_rho = static_cast<double>(x[static_cast<std::size_t>(rho_index)]);
  if (r > x_rho) return 0.0;
  double out = falling_factorial(x_rho, r);
  for (std::int64_t j = 1; j <= rho_index; ++j) {
    out *= 1.0 - r / static_cast<double>(x[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace coalsim
