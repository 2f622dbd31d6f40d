#include "coalsim/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "coalsim/errors.hpp"
#include "coalsim/numerics.hpp"

namespace coalsim {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw DomainError("Rng::below requires n > 0");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

namespace {

double log_factorial(std::int64_t k) { return log_gamma(static_cast<double>(k) + 1.0); }

// Walks the pmf upward from the bottom of the support.
std::int64_t hypergeometric_inverse(Rng& rng, std::int64_t population, std::int64_t marked,
                                    std::int64_t draws) {
  const std::int64_t unmarked = population - marked;
  const std::int64_t lo = std::max<std::int64_t>(0, draws - unmarked);
  const std::int64_t hi = std::min(draws, marked);
  double p = std::exp(log_factorial(marked) - log_factorial(lo) - log_factorial(marked - lo) +
                      log_factorial(unmarked) - log_factorial(draws - lo) -
                      log_factorial(unmarked - draws + lo) - log_factorial(population) +
                      log_factorial(draws) + log_factorial(population - draws));
  double u = rng.uniform();
  for (std::int64_t x = lo; x < hi; ++x) {
    if (u < p) return x;
    u -= p;
    p *= static_cast<double>(marked - x) * static_cast<double>(draws - x) /
         (static_cast<double>(x + 1) * static_cast<double>(unmarked - draws + x + 1));
  }
  return hi;
}

// Stadlober's HRUA ratio-of-uniforms sampler, in the form used by NumPy.
std::int64_t hypergeometric_hrua(Rng& rng, std::int64_t marked, std::int64_t unmarked,
                                 std::int64_t draws) {
  constexpr double d1 = 1.7155277699214135;
  constexpr double d2 = 0.8989161620588988;
  const std::int64_t population = marked + unmarked;
  const std::int64_t min_mu = std::min(marked, unmarked);
  const std::int64_t max_mu = std::max(marked, unmarked);
  const double pop = static_cast<double>(population);
  const double p = static_cast<double>(min_mu) / pop;
  const double q = static_cast<double>(max_mu) / pop;
  const double mean = static_cast<double>(draws) * p;
  const double a = mean + 0.5;
  const double var = (pop - draws) * draws * p * q / (pop - 1.0);
  const double c = std::sqrt(var + 0.5);
  const double h = d1 * c + d2;
  const auto m = static_cast<std::int64_t>(
      std::floor(static_cast<double>(draws + 1) * static_cast<double>(min_mu + 1) / (pop + 2.0)));
  const double g = log_factorial(m) + log_factorial(min_mu - m) + log_factorial(draws - m) +
                   log_factorial(max_mu - draws + m);
  const double b = std::min(static_cast<double>(std::min(draws, min_mu) + 1), std::floor(a + 16.0 * c));
  std::int64_t k = 0;
  for (;;) {
    const double u = rng.uniform_open();
    const double v = rng.uniform_open();
    const double x = a + h * (v - 0.5) / u;
    if (x < 0.0 || x >= b) continue;
    k = static_cast<std::int64_t>(std::floor(x));
    const double gp = log_factorial(k) + log_factorial(min_mu - k) + log_factorial(draws - k) +
                      log_factorial(max_mu - draws + k);
    const double t = g - gp;
    if (u * (4.0 - u) - 3.0 <= t) break;
    if (u * (u - t) >= 1.0) continue;
    if (2.0 * std::log(u) <= t) break;
  }
  if (marked > unmarked) k = draws - k;
  return k;
}

}  // namespace

std::int64_t sample_hypergeometric(Rng& rng, std::int64_t population, std::int64_t marked,
                                   std::int64_t draws) {
  if (population < 0 || marked < 0 || marked > population || draws < 0 || draws > population) {
    throw DomainError("sample_hypergeometric: invalid parameters");
  }
  if (marked == 0 || draws == 0) return 0;
  if (marked == population) return draws;
  if (draws == population) return marked;
  // Drawing n items leaves the complementary N - n items; count marked ones there.
  const bool complement = draws > population - draws;
  const std::int64_t reduced = complement ? population - draws : draws;
  const std::int64_t k = reduced <= 32 ? hypergeometric_inverse(rng, population, marked, reduced)
                                       : hypergeometric_hrua(rng, marked, population - marked, reduced);
  return complement ? marked - k : k;
}

}  // namespace coalsim
