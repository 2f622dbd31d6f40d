#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coalsim/random.hpp"

namespace coalsim {

enum class LimitFamily { typical, frechet, poisson_tail, logistic, gumbel_shifted, exact_bs_moment };

std::string to_string(LimitFamily family);

/// A limit law tag with its exponent α ∈ [1,2] and β = (α-1)/α.
struct LimitLaw {
  LimitFamily family = LimitFamily::typical;
  double alpha = 2.0;
  double beta = 0.5;

  static LimitLaw make(LimitFamily family, double alpha);
  /// CDF of the scalar law: typical, frechet, logistic (and gumbel_shifted,
  /// whose maximum is logistic). Throws for families without a CDF.
  double cdf(double x) const;
};

/// Typical external length limit: density α(1+(α-1)t)^(-1-α/(α-1)), and
/// the standard exponential law at α = 1.
double typical_density(double alpha, double t);
double typical_cdf(double alpha, double t);
double typical_tail(double alpha, double t);

/// exp(-((α-1)x)^(-α/(α-1))), 1 < α <= 2.
double frechet_cdf(double alpha, double x);
/// Φ((x,∞)) = ((α-1)x)^(-α/(α-1)) of the limiting Poisson process.
double poisson_intensity_tail(double alpha, double x);
/// φ(x) = α((α-1)x)^(-1-α/(α-1)).
double poisson_intensity_density(double alpha, double x);

/// Joint density of the ℓ = u.size() largest of y i.i.d. typical(α)
/// variables at u_1 >= ... >= u_ℓ >= 0. With `shifted`, the y → ∞ limit
/// e^{-((α-1)u_ℓ)^(-1/β)} Π α((α-1)u_i)^(-1-1/β) (requires α > 1).
double order_stat_density(double alpha, std::int64_t y, std::span<const double> u, bool shifted);

/// ℓ!C(y,ℓ)(1-e^{-u_ℓ})^(y-ℓ) Π e^{-u_i}: the ℓ largest of y standard
/// exponentials.
double bs_order_stat_density(std::int64_t y, std::span<const double> u);
/// e^{-e^{-u_ℓ}} Π e^{-u_i}: the ℓ largest points of a Poisson process with
/// intensity e^{-x}dx.
double bs_limit_density(std::span<const double> u);

double gumbel_cdf(double x);
double logistic_cdf(double x);
/// Max of the Cox process directed by E e^{-x}dx; equals logistic_cdf.
double cox_max_cdf(double x);
/// ∫_0^∞ e^{-y e^{-x}} e^{-y} dy by quadrature, for cross-checking.
double cox_max_cdf_integral(double x);

/// The ℓ largest points U_1 > ... > U_ℓ of a Poisson process with intensity
/// e^{-x}dx, shifted by -G with G an independent standard Gumbel variable.
std::vector<double> sample_cox_extremes(int ell, Rng& rng);
std::vector<double> sample_cox_extremes(int ell, std::uint64_t seed);

/// Bolthausen-Sznitman: E[N_n(t)^(r)] (ascending factorial)
/// = Γ(r+1)/Γ(1+r e^{-t}) · Γ(n+r e^{-t})/Γ(n).
double moehle_factorial_moment(double n, double t, int r);

}  // namespace coalsim
