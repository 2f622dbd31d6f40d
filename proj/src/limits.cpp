#include "coalsim/limits.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "coalsim/errors.hpp"
#include "coalsim/numerics.hpp"
#include "coalsim/quadrature.hpp"

namespace coalsim {

std::string to_string(LimitFamily family) {
  switch (family) {
    case LimitFamily::typical: return "typical";
    case LimitFamily::frechet: return "frechet";
    case LimitFamily::poisson_tail: return "poisson_tail";
    case LimitFamily::logistic: return "logistic";
    case LimitFamily::gumbel_shifted: return "gumbel_shifted";
    case LimitFamily::exact_bs_moment: return "exact_bs_moment";
  }
  return "typical";
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 1.0 && alpha <= 2.0)) throw DomainError("alpha must lie in [1,2]");
}

void check_alpha_above_one(double alpha) {
  if (!(alpha > 1.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (1,2]");
}

void check_descending(std::span<const double> u) {
  if (u.empty()) throw DomainError("order statistics need at least one point");
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (u[i] > u[i - 1]) throw DomainError("order statistics must be sorted in decreasing order");
  }
}

// log(ℓ! C(y,ℓ)) = log(y!/(y-ℓ)!).
double log_order_factor(std::int64_t y, std::size_t ell) {
  if (ell > static_cast<std::size_t>(y)) throw DomainError("need ell <= y");
  return log_gamma(static_cast<double>(y) + 1.0) - log_gamma(static_cast<double>(y - static_cast<std::int64_t>(ell)) + 1.0);
}

}  // namespace

LimitLaw LimitLaw::make(LimitFamily family, double alpha) {
  check_alpha(alpha);
  return {family, alpha, (alpha - 1.0) / alpha};
}

double LimitLaw::cdf(double x) const {
  switch (family) {
    case LimitFamily::typical: return typical_cdf(alpha, x);
    case LimitFamily::frechet: return frechet_cdf(alpha, x);
    case LimitFamily::logistic:
    case LimitFamily::gumbel_shifted: return logistic_cdf(x);
    default: break;
  }
  throw DomainError("limit family " + to_string(family) + " has no scalar CDF");
}

double typical_tail(double alpha, double t) {
  check_alpha(alpha);
  if (t <= 0.0) return 1.0;
  if (alpha == 1.0) return std::exp(-t);
  return std::exp(-alpha / (alpha - 1.0) * std::log1p((alpha - 1.0) * t));
}

double typical_cdf(double alpha, double t) {
  check_alpha(alpha);
  if (t <= 0.0) return 0.0;
  if (alpha == 1.0) return -std::expm1(-t);
  return -std::expm1(-alpha / (alpha - 1.0) * std::log1p((alpha - 1.0) * t));
}

double typical_density(double alpha, double t) {
  check_alpha(alpha);
  if (t < 0.0) return 0.0;
  if (alpha == 1.0) return std::exp(-t);
  return alpha * std::exp((-1.0 - alpha / (alpha - 1.0)) * std::log1p((alpha - 1.0) * t));
}

double poisson_intensity_tail(double alpha, double x) {
  check_alpha_above_one(alpha);
  if (!(x > 0.0)) throw DomainError("poisson_intensity_tail requires x > 0");
  return std::pow((alpha - 1.0) * x, -alpha / (alpha - 1.0));
}

double poisson_intensity_density(double alpha, double x) {
  check_alpha_above_one(alpha);
  if (!(x > 0.0)) throw DomainError("poisson_intensity_density requires x > 0");
  return alpha * std::pow((alpha - 1.0) * x, -1.0 - alpha / (alpha - 1.0));
}

double frechet_cdf(double alpha, double x) {
  check_alpha_above_one(alpha);
  if (!(x > 0.0)) throw DomainError("frechet_cdf requires x > 0");
  return std::exp(-poisson_intensity_tail(alpha, x));
}

double order_stat_density(double alpha, std::int64_t y, std::span<const double> u, bool shifted) {
  check_descending(u);
  if (shifted) {
    check_alpha_above_one(alpha);
    if (!(u.back() > 0.0)) return 0.0;
    double log_dens = -poisson_intensity_tail(alpha, u.back());
    for (double v : u) log_dens += std::log(poisson_intensity_density(alpha, v));
    return std::exp(log_dens);
  }
  check_alpha(alpha);
  const std::size_t ell = u.size();
  if (y < static_cast<std::int64_t>(ell)) throw DomainError("order_stat_density requires l <= y");
  if (u.back() < 0.0) return 0.0;
  const double f_low = typical_cdf(alpha, u.back());
  const double power = static_cast<double>(y - static_cast<std::int64_t>(ell));
  if (f_low == 0.0 && power > 0.0) return 0.0;
  double log_dens = log_order_factor(y, ell) + (power > 0.0 ? power * std::log(f_low) : 0.0);
  for (double v : u) log_dens += std::log(typical_density(alpha, v));
  return std::exp(log_dens);
}

double bs_order_stat_density(std::int64_t y, std::span<const double> u) {
  check_descending(u);
  return order_stat_density(1.0, y, u, false);
}

double bs_limit_density(std::span<const double> u) {
  check_descending(u);
  double log_dens = -std::exp(-u.back());
  for (double v : u) log_dens -= v;
  return std::exp(log_dens);
}

double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

double logistic_cdf(double x) {
  // Branches keep exp() from overflowing.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double cox_max_cdf(double x) { return logistic_cdf(x); }

double cox_max_cdf_integral(double x) {
  const double rate = std::exp(-x);
  // The integrand is bounded by e^{-y}; the cut at y = 60 drops < 1e-26.
  std::vector<double> edges;
  for (int i = 0; i <= 60; ++i) edges.push_back(i);
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-13;
  cfg.abs_tol = 1e-16;
  return adaptive_integrate([rate](double y) { return std::exp(-y * rate - y); }, edges, cfg).value;
}

std::vector<double> sample_cox_extremes(int ell, Rng& rng) {
  if (ell < 1) throw DomainError("sample_cox_extremes requires ell >= 1");
  std::vector<double> out(static_cast<std::size_t>(ell));
  double arrival = 0.0;
  for (int k = 0; k < ell; ++k) {
    arrival += rng.exponential(1.0);
    out[static_cast<std::size_t>(k)] = -std::log(arrival);
  }
  const double gumbel = -std::log(rng.exponential(1.0));
  for (double& v : out) v -= gumbel;
  return out;
}

std::vector<double> sample_cox_extremes(int ell, std::uint64_t seed) {
  Rng rng(seed);
  return sample_cox_extremes(ell, rng);
}

double moehle_factorial_moment(double n, double t, int r) {
  if (!(n >= 1.0)) throw DomainError("moehle_factorial_moment requires n >= 1");
  if (!(t >= 0.0)) throw DomainError("moehle_factorial_moment requires t >= 0");
  if (r < 1) throw DomainError("moehle_factorial_moment requires r >= 1");
  const double d = r * std::exp(-t);
  // Γ(n+d)/Γ(n) through the delta ratio; the lgamma difference would lose
  // about log10(n log n) digits.
  const double log_ratio = -std::log(boost::math::tgamma_delta_ratio(n, d));
  return std::exp(log_gamma(r + 1.0) - log_gamma(1.0 + d) + log_ratio);
}

}  // namespace coalsim
