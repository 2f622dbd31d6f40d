#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "coalsim/sim.hpp"
#include "coalsim/stats.hpp"

using namespace coalsim;

namespace {

std::shared_ptr<const RateFunctions> rates_for(const std::string& spec) {
  RatesConfig cfg;
  cfg.build_mu_cache = false;
  return std::make_shared<const RateFunctions>(parse_measure(spec), cfg);
}

void check_path_invariants(const CoalescentPath& p) {
  std::int64_t b = p.n;
  std::int64_t y = p.n;
  std::int64_t dy_sum = 0;
  double t = 0;
  for (const Jump& j : p.jumps) {
    CHECK(j.x_before == b);
    CHECK(j.k >= 2);
    CHECK(j.k <= b);
    CHECK(j.dy >= 0);
    CHECK(j.dy <= std::min(j.k, y));
    CHECK(j.w >= 0.0);
    t += j.w;
    CHECK(j.t_jump == doctest::Approx(t).epsilon(1e-12));
    b = b - j.k + 1;
    y -= j.dy;
    dy_sum += j.dy;
    CHECK(b >= 1);
  }
  CHECK(b == 1);
  CHECK(y == 0);
  CHECK(dy_sum == p.n);
}

}  // namespace

TEST_CASE("path invariants across measures") {
  for (const std::string spec : {"kingman", "bolthausen-sznitman", "powerbeta:c=1,a=0.5,b=1", "dirac:p=0.7,m=1",
                                 "kingman:0.2+dirac:p=0.3,m=0.5+beta:2,2", "powerbeta:c=1,a=1.5,b=1"}) {
    const Simulator sim(rates_for(spec), 500);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      for (std::int64_t n : {2, 3, 17, 500}) check_path_invariants(sim.simulate_path(n, seed));
    }
  }
}

TEST_CASE("user densities fall back to explicit merger-size tables") {
  const LambdaMeasure m(0.0, {}, {DensityFunction{[](double p) { return 2 * p; }, 2.0, 1.0, "lin"}});
  auto r = std::make_shared<const RateFunctions>(m);
  const Simulator sim(r, 300);
  for (std::uint64_t seed = 0; seed < 10; ++seed) check_path_invariants(sim.simulate_path(300, seed));
}

TEST_CASE("n = 2 has one forced jump") {
  const Simulator sim(rates_for("powerbeta:c=1,a=0.5,b=1"), 10);
  const auto p = sim.simulate_path(2, 5);
  REQUIRE(p.jumps.size() == 1);
  CHECK(p.jumps[0].k == 2);
  CHECK(p.jumps[0].dy == 2);
  const auto lengths = external_lengths(p).values();
  REQUIRE(lengths.size() == 2);
  CHECK(lengths[0] == p.jumps[0].w);
  CHECK(lengths[1] == p.jumps[0].w);
}

TEST_CASE("n = 2 holding time is exponential with rate lambda_22") {
  const auto r = rates_for("powerbeta:c=1,a=0.5,b=1");
  const Simulator sim(r, 2);
  const int m = 50000;
  double s = 0;
  for (int i = 0; i < m; ++i) s += sim.simulate_path(2, i).jumps[0].w;
  const double mean = 1.0 / r->merger_rate(2, 2);
  CHECK(std::abs(s / m - mean) < 5 * mean / std::sqrt(m));
}

TEST_CASE("kingman n = 3") {
  const Simulator sim(rates_for("kingman"), 3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto p = sim.simulate_path(3, seed);
    REQUIRE(p.jumps.size() == 2);
    CHECK(p.jumps[0].k == 2);
    CHECK(p.jumps[1].k == 2);
    CHECK(p.jumps[0].dy == 2);
  }
}

TEST_CASE("kingman has n-1 jumps with exponential C(b,2) holding times") {
  const Simulator sim(rates_for("kingman"), 50);
  const int m = 100000;
  double at5 = 0;
  int count5 = 0;
  for (int i = 0; i < m / 10; ++i) {
    const auto p = sim.simulate_path(50, i);
    CHECK(p.tau() == 49);
  }
  Rng rng(99);
  ChainOptions opts;
  opts.stop_blocks = 4;
  for (int i = 0; i < m; ++i) {
    sim.run_chain(5, rng, [&](const Jump& j) {
      at5 += j.w;
      ++count5;
      return false;
    }, opts);
  }
  CHECK(count5 == m);
  CHECK(std::abs(at5 / m - 0.1) <= 0.02 * 0.1);
}

TEST_CASE("bolthausen-sznitman holding time at b = 5 has mean 1/4") {
  const Simulator sim(rates_for("bolthausen-sznitman"), 5);
  Rng rng(7);
  const int m = 100000;
  double s = 0;
  for (int i = 0; i < m; ++i) {
    sim.run_chain(5, rng, [&](const Jump& j) {
      s += j.w;
      return false;
    });
  }
  CHECK(std::abs(s / m - 0.25) <= 0.02 * 0.25);
}

TEST_CASE("merger sizes follow the rate distribution") {
  for (const std::string spec : {"bolthausen-sznitman", "powerbeta:c=1,a=0.5,b=1", "dirac:p=0.4,m=1+kingman:0.5"}) {
    const auto r = rates_for(spec);
    const Simulator sim(r, 1000);
    for (std::int64_t b : {6, 1000}) {
      const auto want = r->merger_size_distribution(b);
      Rng rng(123 + b);
      const int m = 100000;
      std::vector<double> counts(want.size(), 0.0);
      for (int i = 0; i < m; ++i) counts[static_cast<std::size_t>(sim.sample_merger_size(b, rng) - 2)] += 1;
      // Compare the CDFs: max deviation within a 0.999 KS band.
      double cw = 0, ce = 0, worst = 0;
      for (std::size_t k = 0; k < want.size(); ++k) {
        cw += want[k];
        ce += counts[k] / m;
        worst = std::max(worst, std::abs(cw - ce));
      }
      CHECK(worst < 1.95 / std::sqrt(m));
    }
  }
}

TEST_CASE("determinism from the seed") {
  const Simulator sim(rates_for("bolthausen-sznitman"), 1000);
  CHECK(sim.simulate_path(1000, 42) == sim.simulate_path(1000, 42));
  CHECK(!(sim.simulate_path(1000, 42) == sim.simulate_path(1000, 43)));
  CHECK(sim.simulate_path(1000, 42).seed == 42);
}

TEST_CASE("external lengths") {
  const Simulator sim(rates_for("bolthausen-sznitman"), 200);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = sim.simulate_path(200, seed);
    const auto e = external_lengths(p);
    std::int64_t total = 0;
    double prev = -1;
    for (const auto& [len, mult] : e.entries) {
      CHECK(len > prev);
      CHECK(mult > 0);
      prev = len;
      total += mult;
    }
    CHECK(total == 200);
    CHECK(e.max() <= p.absorption_time());
    const auto v = e.values();
    CHECK(v.size() == 200);
    CHECK(std::is_sorted(v.begin(), v.end()));
    const auto top = e.largest(3);
    REQUIRE(top.size() == 3);
    CHECK(top[0] == v[199]);
    CHECK(top[1] == v[198]);
    CHECK(top[2] == v[197]);
    CHECK(e.at_rank(10) == v[10]);
    CHECK(e.count_above(v[150]) == static_cast<std::int64_t>(std::count_if(v.begin(), v.end(), [&](double x) { return x > v[150]; })));
  }
}

TEST_CASE("block and singleton counts") {
  const Simulator sim(rates_for("powerbeta:c=1,a=0.5,b=1"), 100);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = sim.simulate_path(100, seed);
    CHECK(block_count_at(p, 0.0) == 100);
    CHECK(singleton_count_at(p, 0.0) == 100);
    CHECK(block_count_at(p, p.absorption_time() + 1) == 1);
    CHECK(singleton_count_at(p, p.absorption_time() + 1) == 0);
    for (const Jump& j : p.jumps) {
      const double t = j.t_jump;
      CHECK(block_count_at(p, t) == j.x_before - j.k + 1);
      CHECK(block_count_at(p, t) - singleton_count_at(p, t) >= 0);
    }
  }
}

TEST_CASE("stopping times") {
  const Simulator sim(rates_for("kingman"), 100);
  const auto p = sim.simulate_path(100, 3);
  auto st = stopping_times(p, 100);
  CHECK(st.rho == 0);
  CHECK(st.rho_tilde == 0.0);
  st = stopping_times(p, 1);
  CHECK(st.rho == p.tau());
  CHECK(st.rho_tilde == p.absorption_time());
  st = stopping_times(p, 50.5);
  const auto x = block_counts(p);
  CHECK(x[static_cast<std::size_t>(st.rho)] <= 50.5);
  CHECK(x[static_cast<std::size_t>(st.rho - 1)] > 50.5);
  CHECK(st.rho_tilde == p.jumps[static_cast<std::size_t>(st.rho - 1)].t_jump);
}

TEST_CASE("conditional factorial moments") {
  const Simulator sim(rates_for("kingman"), 8);
  const auto p = sim.simulate_path(8, 1);
  CHECK(conditional_factorial_moment(p, 0, 1) == 8.0);
  CHECK(conditional_factorial_moment(p, 0, 2) == 56.0);
  const Simulator sim3(rates_for("kingman"), 3);
  const auto p3 = sim3.simulate_path(3, 0);
  CHECK(conditional_factorial_moment(p3, 1, 1) == doctest::Approx(1.0));
  // (X_rho)_r vanishes when r > X_rho.
  CHECK(conditional_factorial_moment(p3, 2, 2) == 0.0);
}

TEST_CASE("conditional replay reproduces the product formula") {
  const Simulator sim(rates_for("kingman"), 8);
  const auto p = sim.simulate_path(8, 11);
  const auto x = block_counts(p);
  const std::int64_t rho = 3;
  const int m = 100000;
  Rng rng(5);
  std::vector<double> y1(m), y2(m);
  for (int i = 0; i < m; ++i) {
    std::int64_t y = 8;
    for (std::int64_t j = 0; j < rho; ++j) {
      const Jump& jp = p.jumps[static_cast<std::size_t>(j)];
      y -= sample_hypergeometric(rng, jp.x_before, y, jp.k);
    }
    y1[i] = static_cast<double>(y);
    y2[i] = static_cast<double>(y * (y - 1));
  }
  for (int r : {1, 2}) {
    const Summary s = summarize(r == 1 ? y1 : y2);
    CHECK(std::abs(s.mean - conditional_factorial_moment(p, rho, r)) <= 3 * s.se);
  }
  // Exact conditional variance bound along the chain.
  for (std::int64_t j = 0; j <= p.tau(); ++j) {
    const double m1 = conditional_factorial_moment(p, j, 1);
    const double m2 = conditional_factorial_moment(p, j, 2);
    CHECK(m2 + m1 - m1 * m1 <= m1 * (1 + 1e-9) + 1e-12);
  }
}

TEST_CASE("labeled mode basics") {
  const Simulator sim(rates_for("bolthausen-sznitman"), 12);
  const auto run2 = sim.simulate_labeled(2, 4);
  REQUIRE(run2.lengths.size() == 2);
  CHECK(run2.lengths[0] == run2.lengths[1]);
  CHECK(run2.lengths[0] == run2.times[1]);
  const auto run = sim.simulate_labeled(12, 9);
  CHECK(run.partitions.front().size() == 12);
  CHECK(run.partitions.back().size() == 1);
  CHECK(run.partitions.back().front() == (1u << 12) - 1);
  for (const auto& part : run.partitions) {
    std::uint32_t all = 0;
    for (std::uint32_t blk : part) {
      CHECK((all & blk) == 0u);
      all |= blk;
    }
    CHECK(all == (1u << 12) - 1);
  }
  CHECK_THROWS_AS((void)sim.simulate_labeled(13, 1), DomainError);
}

TEST_CASE("labeled and unlabeled modes agree in law") {
  for (const std::string spec : {"kingman", "bolthausen-sznitman"}) {
    const Simulator sim(rates_for(spec), 6);
    const int reps = 10000;
    std::vector<double> unl, lab;
    for (int i = 0; i < reps; ++i) {
      const auto v = external_lengths(sim.simulate_path(6, i)).values();
      unl.insert(unl.end(), v.begin(), v.end());
      const auto run = sim.simulate_labeled(6, 1000000 + i);
      lab.insert(lab.end(), run.lengths.begin(), run.lengths.end());
    }
    std::sort(unl.begin(), unl.end());
    std::sort(lab.begin(), lab.end());
    CHECK(ks_two_sample(unl, lab) <= 0.02);
  }
}

TEST_CASE("labeled leaves are exchangeable") {
  const Simulator sim(rates_for("kingman"), 5);
  std::vector<double> leaf1, leaf2;
  for (int i = 0; i < 10000; ++i) {
    const auto run = sim.simulate_labeled(5, i);
    leaf1.push_back(run.lengths[0]);
    leaf2.push_back(run.lengths[1]);
  }
  std::sort(leaf1.begin(), leaf1.end());
  std::sort(leaf2.begin(), leaf2.end());
  CHECK(ks_two_sample(leaf1, leaf2) <= 0.02);
}

TEST_CASE("argument checks") {
  const Simulator sim(rates_for("kingman"), 10);
  CHECK_THROWS_AS((void)sim.simulate_path(11, 1), DomainError);
  CHECK_THROWS_AS((void)sim.simulate_path(1, 1), DomainError);
  const auto p = sim.simulate_path(10, 1);
  CHECK_THROWS_AS((void)stopping_times(p, 0.5), DomainError);
  CHECK_THROWS_AS((void)conditional_factorial_moment(p, p.tau() + 1, 1), DomainError);
  CHECK_THROWS_AS((void)block_count_at(p, -1.0), DomainError);
}
