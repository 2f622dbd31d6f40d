#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coalsim/measure.hpp"

namespace coalsim {

enum class ClosedForm { none, kingman, bolthausen_sznitman, power_beta };

std::string to_string(ClosedForm tag);

struct RatesConfig {
  QuadratureConfig quad{};
  /// Use Beta-integral / digamma closed forms for atoms and power-beta terms.
  /// Off forces every density integral through quadrature.
  bool use_closed_forms = true;
  /// Build the μ interpolation table at construction.
  bool build_mu_cache = true;
  int cache_points_per_decade = 64;
  double cache_x_max = 1e7;
};

enum class DustVerdict { dustless, dusty, inconclusive };

std::string to_string(DustVerdict v);

struct DustDiagnosis {
  DustVerdict verdict = DustVerdict::inconclusive;
  std::string evidence;
  /// ∫ Λ(dp)/p when it is finite and known in closed form.
  std::optional<double> inverse_moment;
  /// (x, μ(x)/x) pairs used by the numeric trend test, if it ran.
  std::vector<std::pair<double, double>> kappa_grid;
};

/// Rate and scaling functions of a Λ-coalescent:
///   λ_{b,k} = ∫ p^k (1-p)^(b-k) Λ(dp)/p²,
///   λ(b)    = Σ_k C(b,k) λ_{b,k}            (total jump rate),
///   μ(x)    = ∫ (xp - 1 + (1-p)^x) Λ(dp)/p²  (rate of decrease),
/// together with μ', μ'', κ(x) = μ(x)/x, H, h and the sequence s_n.
///
/// Immutable after construction; every evaluator is const and safe to call
/// from several threads.
class RateFunctions {
 public:
  explicit RateFunctions(LambdaMeasure measure, RatesConfig cfg = {});

  const LambdaMeasure& measure() const noexcept { return measure_; }
  const RatesConfig& config() const noexcept { return cfg_; }
  ClosedForm closed_form() const noexcept { return closed_form_; }

  double merger_rate(std::int64_t b, std::int64_t k) const;
  double total_jump_rate(std::int64_t b) const;
  /// Entry k-2 holds C(b,k) λ_{b,k} / λ(b) for k = 2..b.
  std::vector<double> merger_size_distribution(std::int64_t b) const;

  double mu(double x) const;
  /// (μ'(x), μ''(x)).
  std::pair<double, double> mu_derivatives(double x) const;
  double kappa(double x) const { return mu(x) / x; }
  /// Cheap monotone interpolation of μ from the construction-time table.
  /// Falls back to mu() outside the table.
  double mu_interpolated(double x) const;
  /// Grid points of the μ table (empty when the cache is disabled).
  std::vector<double> mu_cache_grid() const;

  /// x >= 1 with |μ(x) - y| <= 1e-9 max(1, y).
  double invert_mu(double y) const;
  /// s_n solving μ(s_n) = μ(n)/n.
  double s_sequence(double n) const;

  /// ∫_{x_lo}^{x_hi} dx / μ(x).
  double inverse_mu_integral(double x_lo, double x_hi) const;

  double H(double u) const;
  double h(double z) const;

  DustDiagnosis dust_diagnostic() const;

  /// Least-squares slope of log μ against log x on 16 log-spaced points per
  /// decade of [x_lo, x_hi].
  double rv_exponent_estimate(double x_lo, double x_hi) const;

  /// Regular-variation exponent when the family determines it (atom at zero:
  /// 2; power-beta with a < 1: 2 - a; power-beta with a = 1: 1).
  std::optional<double> known_alpha() const;

 private:
  double density_mu(double x) const;
  std::pair<double, double> density_mu_derivatives(double x) const;

  LambdaMeasure measure_;
  RatesConfig cfg_;
  ClosedForm closed_form_ = ClosedForm::none;
  struct MuCache;
  std::shared_ptr<const MuCache> cache_;
};

/// t_n = loglog n - logloglog n + logloglog n / loglog n, or 0 when that
/// expression is negative or undefined.
double t_sequence(double n);
/// t_{c,n} = t_n - log c / loglog n, c > 1.
double t_c_sequence(double n, double c);

namespace kernels {
/// P(Bin(b,p) >= 2) / p², accurate for small b p.
double binomial_ge2_over_p2(double b, double p);
/// ((1-p)^x - 1 + x p) / p², cancellation-free; x(x-1)/2 at p = 0.
double mu_kernel(double x, double p);
/// ((1-p)^x log(1-p) + p) / p²; x - 1/2 at p = 0.
double mu_prime_kernel(double x, double p);
/// (1-p)^x log²(1-p) / p²; 1 at p = 0.
double mu_second_kernel(double x, double p);
}  // namespace kernels

}  // namespace coalsim
