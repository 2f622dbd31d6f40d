#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "coalsim/errors.hpp"

namespace coalsim {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

/// Theorem tags: T1.1 T1.2 T1.3 C1.4 T1.5 T1.6 P2.1 P2.2 T4.1 L7.1 L9.2,
/// plus SIM for the labeled/unlabeled simulator comparison.
struct ExperimentConfig {
  std::string theorem = "C1.4";
  std::string measure = "kingman";
  std::int64_t n = 1000;
  std::vector<std::int64_t> n_grid;
  std::int64_t replications = 1000;
  std::uint64_t seed = kDefaultSeed;
  /// Worker threads; results do not depend on it and it is not echoed.
  int threads = 1;
  std::vector<double> t_grid;
  /// Level r_n: a number, "n/<d>", "<f>*n" or "n^<e>".
  std::string r_rule;
  double c = 2.0;
  int ell = 1;
  int k = 2;
  /// Extra numeric knobs (secondary sizes and replication counts).
  std::map<std::string, double> params;
  /// Tolerance overrides by statistic name.
  std::map<std::string, double> tolerances;
};

/// One checked or informational quantity. `pass` is empty for diagnostics.
/// `criterion` spells out the comparison: "abs" |value-target| <= tol,
/// "max" value <= tol, "at_least" value >= target - tol, "at_most"
/// value <= target + tol, "se" |value-target| <= tol*se, "info" unchecked.
struct Statistic {
  std::string name;
  double value = 0.0;
  std::optional<double> se;
  std::optional<double> target;
  std::optional<double> tol;
  std::optional<bool> pass;
  std::string criterion;
};

struct Curve {
  std::string name;
  std::vector<double> x;
  std::vector<double> empirical;
  std::vector<double> theoretical;
};

struct ExperimentReport {
  ExperimentConfig config;  // with effective tolerances filled in
  std::vector<Statistic> statistics;
  std::map<std::string, std::string> info;
  std::vector<Curve> curves;
  double runtime_ms = 0.0;

  bool passed() const;
  /// {config, statistics, info, verdict, seed}; runtime is left out so the
  /// output is reproducible byte for byte.
  std::string to_json(int indent = 2) const;
  /// Long-format CSV: curve, x, empirical, theoretical.
  std::string curves_csv() const;
};

ExperimentReport run_typical_length(const ExperimentConfig& cfg);
ExperimentReport run_independence(const ExperimentConfig& cfg);
ExperimentReport run_tail_identity(const ExperimentConfig& cfg);
ExperimentReport run_lln(const ExperimentConfig& cfg);
ExperimentReport run_order_statistics(const ExperimentConfig& cfg);
ExperimentReport run_bs_extremes(const ExperimentConfig& cfg);
ExperimentReport run_factorial_moments(const ExperimentConfig& cfg);
ExperimentReport run_mode_equivalence(const ExperimentConfig& cfg);

/// Dispatches on cfg.theorem and records the wall-clock time.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// r_n for the rule text at sample size n.
double resolve_level(const std::string& rule, double n);

/// Calls f(i) for i in [0, count) on up to `threads` workers and returns the
/// results in index order. The first exception (by index) is rethrown.
template <class F>
auto run_replications(std::int64_t count, int threads, F&& f) -> std::vector<decltype(f(std::int64_t{}))> {
  using R = decltype(f(std::int64_t{}));
  std::vector<R> out(static_cast<std::size_t>(count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        out[static_cast<std::size_t>(i)] = f(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
        next.store(count);
      }
    }
  };
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::int64_t>(count, 1))));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace coalsim
