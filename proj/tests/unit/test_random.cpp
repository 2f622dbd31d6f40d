#include "doctest.h"

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "coalsim/random.hpp"

using namespace coalsim;

namespace {

double hypergeometric_pmf(std::int64_t N, std::int64_t K, std::int64_t n, std::int64_t k) {
  auto lc = [](double a, double b) { return std::lgamma(a + 1) - std::lgamma(b + 1) - std::lgamma(a - b + 1); };
  return std::exp(lc(K, k) + lc(N - K, n - k) - lc(N, n));
}

// Pearson chi-square over cells with expected count >= 5 (the rest pooled).
double chi_square(std::int64_t N, std::int64_t K, std::int64_t n, int draws, std::uint64_t seed, int& dof) {
  Rng rng(seed);
  const std::int64_t lo = std::max<std::int64_t>(0, n - (N - K));
  const std::int64_t hi = std::min(K, n);
  std::vector<double> counts(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (int i = 0; i < draws; ++i) {
    const std::int64_t x = sample_hypergeometric(rng, N, K, n);
    REQUIRE(x >= lo);
    REQUIRE(x <= hi);
    counts[static_cast<std::size_t>(x - lo)] += 1;
  }
  double stat = 0, pooled_obs = 0, pooled_exp = 0;
  dof = -1;
  for (std::int64_t k = lo; k <= hi; ++k) {
    const double e = draws * hypergeometric_pmf(N, K, n, k);
    const double o = counts[static_cast<std::size_t>(k - lo)];
    if (e >= 5) {
      stat += (o - e) * (o - e) / e;
      ++dof;
    } else {
      pooled_obs += o;
      pooled_exp += e;
    }
  }
  if (pooled_exp >= 5) {
    stat += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++dof;
  }
  return stat;
}

// Upper 0.999 chi-square quantile via Wilson-Hilferty.
double chi_square_999(int dof) {
  const double z = 3.0902;
  const double a = 2.0 / (9.0 * dof);
  return dof * std::pow(1 - a + z * std::sqrt(a), 3);
}

}  // namespace

TEST_CASE("uniform variates lie in range and are reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 10000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform());
    const double v = a.uniform_open();
    b.uniform_open();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("exponential mean") {
  Rng rng(3);
  double s = 0;
  const int m = 200000;
  for (int i = 0; i < m; ++i) s += rng.exponential(4.0);
  CHECK(std::abs(s / m - 0.25) < 5 * 0.25 / std::sqrt(m));
}

TEST_CASE("below is uniform on small ranges") {
  Rng rng(5);
  const int m = 70000;
  std::vector<int> counts(7, 0);
  for (int i = 0; i < m; ++i) {
    const auto x = rng.below(7);
    REQUIRE(x < 7);
    ++counts[x];
  }
  double stat = 0;
  for (int c : counts) stat += (c - m / 7.0) * (c - m / 7.0) / (m / 7.0);
  CHECK(stat < chi_square_999(6));
}

TEST_CASE("replication seeds are base xor index") {
  CHECK(replication_seed(0xF0, 0x0F) == 0xFF);
  CHECK(replication_seed(1234, 0) == 1234);
}

TEST_CASE("hypergeometric degenerate cases") {
  Rng rng(9);
  CHECK(sample_hypergeometric(rng, 10, 10, 4) == 4);
  CHECK(sample_hypergeometric(rng, 10, 0, 4) == 0);
  CHECK(sample_hypergeometric(rng, 10, 3, 10) == 3);
  CHECK(sample_hypergeometric(rng, 10, 3, 0) == 0);
  CHECK(sample_hypergeometric(rng, 2, 2, 2) == 2);
}

TEST_CASE("hypergeometric law by chi-square on the inverse-transform path") {
  int dof = 0;
  const double stat = chi_square(40, 15, 8, 100000, 11, dof);
  REQUIRE(dof > 3);
  CHECK(stat < chi_square_999(dof));
}

TEST_CASE("hypergeometric law by chi-square on the ratio-of-uniforms path") {
  for (auto [N, K, n] : std::vector<std::array<std::int64_t, 3>>{{1000, 400, 200}, {5000, 4000, 2500}, {300, 50, 120}}) {
    int dof = 0;
    const double stat = chi_square(N, K, n, 100000, 13 + N, dof);
    REQUIRE(dof > 5);
    CHECK(stat < chi_square_999(dof));
  }
}

TEST_CASE("hypergeometric moments at large population") {
  Rng rng(21);
  const std::int64_t N = 1000000, K = 300000, n = 50000;
  const int m = 20000;
  double s = 0, s2 = 0;
  for (int i = 0; i < m; ++i) {
    const double x = static_cast<double>(sample_hypergeometric(rng, N, K, n));
    s += x;
    s2 += x * x;
  }
  const double mean = s / m;
  const double var = s2 / m - mean * mean;
  const double p = static_cast<double>(K) / N;
  const double want_mean = n * p;
  const double want_var = n * p * (1 - p) * (N - n) / (N - 1.0);
  CHECK(std::abs(mean - want_mean) < 5 * std::sqrt(want_var / m));
  CHECK(std::abs(var / want_var - 1) < 0.05);
}
