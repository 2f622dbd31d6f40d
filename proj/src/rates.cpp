#include "coalsim/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

// Boost 1.74 pchip calls unqualified isnan without including a declaration.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "coalsim/numerics.hpp"
#include "coalsim/quadrature.hpp"

namespace coalsim {

std::string to_string(ClosedForm tag) {
  switch (tag) {
    case ClosedForm::kingman: return "kingman";
    case ClosedForm::bolthausen_sznitman: return "bolthausen-sznitman";
    case ClosedForm::power_beta: return "power-beta";
    case ClosedForm::none: break;
  }
  return "none";
}

std::string to_string(DustVerdict v) {
  switch (v) {
    case DustVerdict::dustless: return "dustless";
    case DustVerdict::dusty: return "dusty";
    case DustVerdict::inconclusive: break;
  }
  return "inconclusive";
}

namespace kernels {
namespace {

// e^L - 1 - L without cancellation.
double exp_remainder2(double L) {
  if (std::abs(L) < 0.5) {
    double term = 0.5 * L * L;
    double sum = term;
    for (int j = 3; j < 40; ++j) {
      term *= L / j;
      sum += term;
      if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    return sum;
  }
  return std::expm1(L) - L;
}

// log(1-p) + p for 0 <= p < 1.
double log1m_plus(double p) {
  if (p < 0.1) {
    double pj = p * p;
    double sum = 0.0;
    for (int j = 2; j < 80; ++j) {
      const double term = pj / j;
      sum += term;
      if (term <= 1e-17 * sum) break;
      pj *= p;
    }
    return -sum;
  }
  return std::log1p(-p) + p;
}

}  // namespace

double binomial_ge2_over_p2(double b, double p) {
  if (p <= 0.0) return 0.5 * b * (b - 1.0);
  if (p >= 1.0) return 1.0;
  if (b * p < 0.1) {
    const double ratio = p / (1.0 - p);
    double term = 0.5 * b * (b - 1.0) * std::exp((b - 2.0) * std::log1p(-p));
    double sum = term;
    for (double j = 2.0; j < b; j += 1.0) {
      term *= (b - j) / (j + 1.0) * ratio;
      sum += term;
      if (term <= 1e-17 * sum) break;
    }
    return sum;
  }
  const double l = std::log1p(-p);
  const double tail = -std::expm1(b * l) - b * p * std::exp((b - 1.0) * l);
  return tail / (p * p);
}

double mu_kernel(double x, double p) {
  if (p <= 0.0) return 0.5 * x * (x - 1.0);
  if (p >= 1.0) return x - 1.0;
  const double p0 = 1e-3 * std::min(1.0, 1.0 / x);
  if (p < p0) {
    // Σ_{j>=2} C(x,j) (-p)^(j-2), truncated after four terms.
    const double c2 = 0.5 * x * (x - 1.0);
    const double c3 = c2 * (x - 2.0) / 3.0;
    const double c4 = c3 * (x - 3.0) / 4.0;
    const double c5 = c4 * (x - 4.0) / 5.0;
    return c2 - p * (c3 - p * (c4 - p * c5));
  }
  const double L = x * std::log1p(-p);
  return (exp_remainder2(L) + x * log1m_plus(p)) / (p * p);
}

double mu_prime_kernel(double x, double p) {
  if (p <= 1e-100) return x - 0.5;
  if (p >= 1.0) return 1.0;
  const double l = std::log1p(-p);
  return (std::expm1(x * l) * l + log1m_plus(p)) / (p * p);
}

double mu_second_kernel(double x, double p) {
  if (p <= 1e-100) return 1.0;
  if (p >= 1.0) return 0.0;
  const double l = std::log1p(-p);
  const double r = l / p;
  return std::exp(x * l) * r * r;
}

}  // namespace kernels

namespace {

bool is_bs_term(const PowerBeta& pb) { return pb.a == 1.0 && pb.b == 1.0; }

// Closed forms through Γ continuation are used away from the poles at a = 1, 2.
bool power_beta_mu_closed(const PowerBeta& pb) { return is_bs_term(pb) || pb.a <= 0.95; }

double psi(double x) { return boost::math::digamma(x); }
double psi1(double x) { return boost::math::trigamma(x); }
double psi2(double x) { return boost::math::polygamma(2, x); }

// λ_{b,k} contribution of a power-beta term: c B(k+a-2, b-k+b').
double power_beta_lambda(const PowerBeta& pb, double b, double k) {
  return pb.c * std::exp(log_beta(k + pb.a - 2.0, b - k + pb.b));
}

// Total jump rate of a power-beta term, λ(b) = Σ_{j=2}^b (j-1) λ_{j,2}.
double power_beta_total_rate(const PowerBeta& pb, std::int64_t b) {
  if (is_bs_term(pb)) return pb.c * static_cast<double>(b - 1);
  double beta = std::exp(log_beta(pb.a, pb.b));  // B(a, j-2+b') at j = 2
  double sum = 0.0;
  for (std::int64_t j = 2; j <= b; ++j) {
    sum += static_cast<double>(j - 1) * beta;
    const double m = static_cast<double>(j - 2) + pb.b;
    beta *= m / (pb.a + m);
  }
  return pb.c * sum;
}

double power_beta_mu(const PowerBeta& pb, double x) {
  if (is_bs_term(pb)) return pb.c * x * (psi(x + 1.0) + kEulerGamma - 1.0);
  const double a = pb.a, b = pb.b;
  return pb.c * (x * beta_signed(a - 1.0, b) - beta_signed(a - 2.0, b) + beta_signed(a - 2.0, x + b));
}

// Asymptotic series coefficients B_{2k} for ψ and ψ'.
constexpr double kBernoulli[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6};

// ψ(y+d) - ψ(y) and ψ'(y+d) - ψ'(y). For large arguments the two values agree
// in most digits, so the asymptotic expansions are differenced term by term.
double digamma_diff(double y, double d) {
  if (std::min(y, y + d) < 30.0) return psi(y + d) - psi(y);
  const double lr = std::log1p(d / y);
  double out = lr + 0.5 * d / (y * (y + d));
  double ypow = 1.0;
  for (int k = 1; k <= 7; ++k) {
    ypow /= y * y;
    out -= kBernoulli[k - 1] / (2.0 * k) * ypow * std::expm1(-2.0 * k * lr);
  }
  return out;
}

double trigamma_diff(double y, double d) {
  if (std::min(y, y + d) < 30.0) return psi1(y + d) - psi1(y);
  const double lr = std::log1p(d / y);
  double out = -d / (y * (y + d)) + 0.5 / (y * y) * std::expm1(-2.0 * lr);
  double ypow = 1.0 / y;
  for (int k = 1; k <= 7; ++k) {
    ypow /= y * y;
    out += kBernoulli[k - 1] * ypow * std::expm1(-(2.0 * k + 1.0) * lr);
  }
  return out;
}

std::pair<double, double> power_beta_mu_derivatives(const PowerBeta& pb, double x) {
  if (is_bs_term(pb)) {
    const double d1 = psi(x + 1.0) + kEulerGamma - 1.0 + x * psi1(x + 1.0);
    const double d2 = 2.0 * psi1(x + 1.0) + x * psi2(x + 1.0);
    return {pb.c * d1, pb.c * d2};
  }
  const double a = pb.a, b = pb.b;
  const double bx = beta_signed(a - 2.0, x + b);
  const double dpsi = -digamma_diff(x + b, a - 2.0);
  const double d1 = beta_signed(a - 1.0, b) + bx * dpsi;
  const double d2 = bx * (dpsi * dpsi - trigamma_diff(x + b, a - 2.0));
  return {pb.c * d1, pb.c * d2};
}

}  // namespace

struct RateFunctions::MuCache {
  double x_max;
  boost::math::interpolators::pchip<std::vector<double>> spline;
};

RateFunctions::RateFunctions(LambdaMeasure measure, RatesConfig cfg)
    : measure_(std::move(measure)), cfg_(cfg) {
  if (measure_.is_kingman()) {
    closed_form_ = ClosedForm::kingman;
  } else if (measure_.is_bolthausen_sznitman()) {
    closed_form_ = ClosedForm::bolthausen_sznitman;
  } else if (measure_.is_pure_power_beta()) {
    closed_form_ = ClosedForm::power_beta;
  }

  if (cfg_.build_mu_cache) {
    // log(μ(x)/(x-1)) is nondecreasing in x; interpolating it in log x keeps
    // the reconstructed μ monotone.
    const int per_decade = std::max(cfg_.cache_points_per_decade, 4);
    const int points = static_cast<int>(std::ceil(std::log10(cfg_.cache_x_max) * per_decade)) + 1;
    std::vector<double> s(points), g(points);
    for (int i = 0; i < points; ++i) {
      const double x = std::pow(10.0, static_cast<double>(i) / per_decade);
      s[i] = std::log(x);
      const double slope = i == 0 ? mu_derivatives(1.0).first : mu(x) / (x - 1.0);
      g[i] = std::log(slope);
    }
    const double x_max = std::exp(s.back());
    cache_ = std::make_shared<const MuCache>(
        MuCache{x_max, boost::math::interpolators::pchip<std::vector<double>>(std::move(s), std::move(g))});
  }
}

double RateFunctions::merger_rate(std::int64_t b, std::int64_t k) const {
  if (b < 2 || k < 2 || k > b) throw DomainError("merger_rate requires 2 <= k <= b");
  const double bd = static_cast<double>(b);
  const double kd = static_cast<double>(k);
  double out = k == 2 ? measure_.atom_at_zero() : 0.0;
  for (const Atom& at : measure_.atoms()) {
    const double p = at.location;
    double v = (k == 2 ? 1.0 : std::pow(p, kd - 2.0));
    v *= (b == k ? 1.0 : std::pow(1.0 - p, bd - kd));
    out += at.mass * v;
  }
  auto kernel = [&](double p) {
    const double head = k == 2 ? 1.0 : std::exp((kd - 2.0) * std::log(p));
    const double tail = b == k ? 1.0 : std::exp((bd - kd) * std::log1p(-p));
    return head * tail;
  };
  const auto bps = geometric_breakpoints(kd / bd);
  for (const auto& term : measure_.densities()) {
    const auto* pb = std::get_if<PowerBeta>(&term);
    if (pb && cfg_.use_closed_forms) {
      out += power_beta_lambda(*pb, bd, kd);
    } else {
      out += integrate_density_term(term, kernel, cfg_.quad, bps);
    }
  }
  return out;
}

double RateFunctions::total_jump_rate(std::int64_t b) const {
  if (b < 2) throw DomainError("total_jump_rate requires b >= 2");
  const double bd = static_cast<double>(b);
  double out = measure_.atom_at_zero() * 0.5 * bd * (bd - 1.0);
  for (const Atom& at : measure_.atoms()) out += at.mass * kernels::binomial_ge2_over_p2(bd, at.location);
  const auto bps = geometric_breakpoints(1.0 / bd);
  for (const auto& term : measure_.densities()) {
    const auto* pb = std::get_if<PowerBeta>(&term);
    if (pb && cfg_.use_closed_forms) {
      out += power_beta_total_rate(*pb, b);
    } else {
      out += integrate_density_term(
          term, [bd](double p) { return kernels::binomial_ge2_over_p2(bd, p); }, cfg_.quad, bps);
    }
  }
  return out;
}

std::vector<double> RateFunctions::merger_size_distribution(std::int64_t b) const {
  if (b < 2) throw DomainError("merger_size_distribution requires b >= 2");
  std::vector<double> out(static_cast<std::size_t>(b - 1));
  const double bd = static_cast<double>(b);
  const bool all_closed =
      cfg_.use_closed_forms &&
      std::all_of(measure_.densities().begin(), measure_.densities().end(),
                  [](const DensityTerm& t) { return std::holds_alternative<PowerBeta>(t); });
  for (std::int64_t k = 2; k <= b; ++k) {
    const double kd = static_cast<double>(k);
    const double log_binom = log_binomial(bd, kd);
    double rate = 0.0;
    if (all_closed) {
      // Log-domain assembly keeps C(b,k) from overflowing at large b.
      if (k == 2) rate += measure_.atom_at_zero() * std::exp(log_binom);
      for (const Atom& at : measure_.atoms()) {
        if (at.location == 1.0) {
          if (k == b) rate += at.mass;
          continue;
        }
        rate += at.mass * std::exp(log_binom + (kd - 2.0) * std::log(at.location) +
                                   (bd - kd) * std::log1p(-at.location));
      }
      for (const auto& term : measure_.densities()) {
        const auto& pb = std::get<PowerBeta>(term);
        rate += std::exp(std::log(pb.c) + log_binom + log_beta(kd + pb.a - 2.0, bd - kd + pb.b));
      }
    } else {
      rate = std::exp(log_binom) * merger_rate(b, k);
    }
    out[static_cast<std::size_t>(k - 2)] = rate;
  }
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& v : out) v /= total;
  return out;
}

double RateFunctions::density_mu(double x) const {
  double out = 0.0;
  const auto bps = geometric_breakpoints(1.0 / x);
  for (const auto& term : measure_.densities()) {
    const auto* pb = std::get_if<PowerBeta>(&term);
    if (pb && cfg_.use_closed_forms && power_beta_mu_closed(*pb)) {
      out += power_beta_mu(*pb, x);
    } else {
      out += integrate_density_term(term, [x](double p) { return kernels::mu_kernel(x, p); }, cfg_.quad, bps);
    }
  }
  return out;
}

double RateFunctions::mu(double x) const {
  if (!(x >= 1.0)) throw DomainError("mu requires x >= 1");
  if (x == 1.0) return 0.0;
  double out = measure_.atom_at_zero() * 0.5 * x * (x - 1.0);
  for (const Atom& at : measure_.atoms()) out += at.mass * kernels::mu_kernel(x, at.location);
  return out + density_mu(x);
}

std::pair<double, double> RateFunctions::density_mu_derivatives(double x) const {
  double d1 = 0.0, d2 = 0.0;
  const auto bps = geometric_breakpoints(1.0 / x);
  for (const auto& term : measure_.densities()) {
    const auto* pb = std::get_if<PowerBeta>(&term);
    if (pb && cfg_.use_closed_forms && power_beta_mu_closed(*pb)) {
      const auto [a1, a2] = power_beta_mu_derivatives(*pb, x);
      d1 += a1;
      d2 += a2;
    } else {
      d1 += integrate_density_term(term, [x](double p) { return kernels::mu_prime_kernel(x, p); }, cfg_.quad, bps);
      d2 += integrate_density_term(term, [x](double p) { return kernels::mu_second_kernel(x, p); }, cfg_.quad, bps);
    }
  }
  return {d1, d2};
}

std::pair<double, double> RateFunctions::mu_derivatives(double x) const {
  if (!(x >= 1.0)) throw DomainError("mu_derivatives requires x >= 1");
  const double m0 = measure_.atom_at_zero();
  double d1 = m0 * (x - 0.5);
  double d2 = m0;
  for (const Atom& at : measure_.atoms()) {
    d1 += at.mass * kernels::mu_prime_kernel(x, at.location);
    d2 += at.mass * kernels::mu_second_kernel(x, at.location);
  }
  const auto [e1, e2] = density_mu_derivatives(x);
  return {d1 + e1, d2 + e2};
}

double RateFunctions::mu_interpolated(double x) const {
  if (!cache_ || x > cache_->x_max || x < 1.0) return mu(x);
  if (x == 1.0) return 0.0;
  return (x - 1.0) * std::exp(cache_->spline(std::log(x)));
}

std::vector<double> RateFunctions::mu_cache_grid() const {
  std::vector<double> out;
  if (!cache_) return out;
  const int per_decade = std::max(cfg_.cache_points_per_decade, 4);
  for (int i = 0;; ++i) {
    const double x = std::pow(10.0, static_cast<double>(i) / per_decade);
    if (x > cache_->x_max * (1.0 + 1e-12)) break;
    out.push_back(x);
  }
  return out;
}

double RateFunctions::invert_mu(double y) const {
  if (!(y >= 0.0) || !std::isfinite(y)) throw DomainError("invert_mu requires finite y >= 0");
  if (y == 0.0) return 1.0;
  double lo = 1.0;
  double hi = 2.0;
  while (mu(hi) < y) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw std::runtime_error("invert_mu: bracket expansion failed");
  }
  auto f = [&](double x) { return mu(x) - y; };
  boost::uintmax_t iterations = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 2), iterations);
  double x = 0.5 * (bracket.first + bracket.second);
  // toms748 stops on bracket width; pick whichever end has the smaller residual.
  for (double cand : {bracket.first, bracket.second}) {
    if (std::abs(f(cand)) < std::abs(f(x))) x = cand;
  }
  const double residual = std::abs(f(x));
  if (residual > 1e-9 * std::max(1.0, y)) {
    throw std::runtime_error("invert_mu: residual " + std::to_string(residual) + " above tolerance");
  }
  return x;
}

double RateFunctions::s_sequence(double n) const {
  if (!(n >= 2.0)) throw DomainError("s_sequence requires n >= 2");
  return invert_mu(mu(n) / n);
}

double RateFunctions::inverse_mu_integral(double x_lo, double x_hi) const {
  if (!(x_lo > 1.0) || !(x_hi >= x_lo)) throw DomainError("inverse_mu_integral requires 1 < x_lo <= x_hi");
  if (x_hi == x_lo) return 0.0;
  // x = e^s: ∫ dx/μ(x) = ∫ e^s/μ(e^s) ds.
  const double s_lo = std::log(x_lo);
  const double s_hi = std::log(x_hi);
  std::vector<double> edges;
  const int panels = std::max(1, static_cast<int>(std::ceil(s_hi - s_lo)));
  for (int i = 0; i <= panels; ++i) edges.push_back(s_lo + (s_hi - s_lo) * i / panels);
  auto f = [&](double s) {
    const double x = std::exp(s);
    return x / mu(x);
  };
  return adaptive_integrate(f, edges, cfg_.quad).value;
}

double RateFunctions::H(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw DomainError("H requires 0 <= u <= 1");
  // H(u) = Λ({0})/2 + ∫_{(0,1]} K_u(p) Λ(dp) with K_u(p) = 1/2 for p <= u and
  // u/p - u²/(2p²) above u (Fubini applied to the double integral).
  double out = 0.5 * measure_.atom_at_zero();
  if (u == 0.0) return out;
  auto kernel = [u](double p) { return p <= u ? 0.5 : u / p - 0.5 * (u / p) * (u / p); };
  for (const Atom& at : measure_.atoms()) out += at.mass * kernel(at.location);
  auto bps = geometric_breakpoints(u);
  bps.push_back(u);
  return out + measure_.integrate_density(kernel, cfg_.quad, bps);
}

double RateFunctions::h(double z) const {
  if (!(z >= 0.0 && z <= 1.0)) throw DomainError("h requires 0 <= z <= 1");
  // h(z) = ∫_z^1 ∫_{(y,1]} Λ(dp)/p² dy = ∫_{(z,1]} (p - z)/p² Λ(dp).
  if (z == 0.0) {
    const auto diag = dust_diagnostic();
    if (diag.inverse_moment) return *diag.inverse_moment;
    if (diag.verdict == DustVerdict::dustless) return std::numeric_limits<double>::infinity();
  }
  auto kernel = [z](double p) { return p <= z ? 0.0 : (p - z) / (p * p); };
  double out = 0.0;
  for (const Atom& at : measure_.atoms()) out += at.mass * kernel(at.location);
  auto bps = geometric_breakpoints(std::max(z, 1e-300));
  if (z > 0.0) bps.push_back(z);
  return out + measure_.integrate_density(kernel, cfg_.quad, bps);
}

DustDiagnosis RateFunctions::dust_diagnostic() const {
  DustDiagnosis out;
  if (measure_.atom_at_zero() > 0.0) {
    out.verdict = DustVerdict::dustless;
    out.evidence = "atom at zero: integrand of ∫Λ(dp)/p diverges at p = 0";
    return out;
  }
  bool numeric_needed = false;
  double finite_part = 0.0;
  for (const Atom& at : measure_.atoms()) finite_part += at.mass / at.location;
  for (const auto& term : measure_.densities()) {
    if (const auto* pb = std::get_if<PowerBeta>(&term)) {
      if (pb->a <= 1.0) {
        out.verdict = DustVerdict::dustless;
        std::ostringstream os;
        os << "power-beta density with a = " << pb->a << " <= 1: ∫ p^(a-2) dp diverges at 0";
        out.evidence = os.str();
        return out;
      }
      finite_part += pb->c * std::exp(log_beta(pb->a - 1.0, pb->b));
    } else {
      numeric_needed = true;
    }
  }
  if (!numeric_needed) {
    out.verdict = DustVerdict::dusty;
    out.inverse_moment = finite_part;
    out.evidence = "∫Λ(dp)/p is finite in closed form";
    return out;
  }

  // Trend test on κ(x) = μ(x)/x over decades: a diverging κ keeps (or grows)
  // its per-decade increments, a converging one sees them shrink geometrically.
  std::vector<double> increments;
  for (int e = 2; e <= 8; ++e) {
    const double x = std::pow(10.0, e);
    out.kappa_grid.emplace_back(x, kappa(x));
  }
  for (std::size_t i = 1; i < out.kappa_grid.size(); ++i) {
    increments.push_back(out.kappa_grid[i].second - out.kappa_grid[i - 1].second);
  }
  int growing = 0, shrinking = 0;
  for (std::size_t i = 1; i < increments.size(); ++i) {
    const double ratio = increments[i] / increments[i - 1];
    if (ratio >= 0.9) ++growing;
    if (ratio <= 0.5) ++shrinking;
  }
  const int votes = static_cast<int>(increments.size()) - 1;
  std::ostringstream os;
  os << "kappa trend over decades 1e2..1e8: " << growing << " of " << votes
     << " increment ratios >= 0.9, " << shrinking << " <= 0.5";
  out.evidence = os.str();
  if (growing == votes) {
    out.verdict = DustVerdict::dustless;
  } else if (shrinking == votes) {
    out.verdict = DustVerdict::dusty;
  } else {
    out.verdict = DustVerdict::inconclusive;
  }
  return out;
}

double RateFunctions::rv_exponent_estimate(double x_lo, double x_hi) const {
  if (!(x_lo >= 2.0) || !(x_hi > x_lo)) throw DomainError("rv_exponent_estimate requires 2 <= x_lo < x_hi");
  const double decades = std::log10(x_hi / x_lo);
  const int points = std::max(2, static_cast<int>(std::ceil(16.0 * decades)) + 1);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < points; ++i) {
    const double lx = std::log(x_lo) + (std::log(x_hi) - std::log(x_lo)) * i / (points - 1);
    const double ly = std::log(mu(std::exp(lx)));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = points;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::optional<double> RateFunctions::known_alpha() const {
  if (measure_.atom_at_zero() > 0.0) return 2.0;
  std::optional<double> alpha;
  for (const auto& term : measure_.densities()) {
    const auto* pb = std::get_if<PowerBeta>(&term);
    if (!pb) return std::nullopt;
    if (pb->a <= 1.0) {
      const double candidate = 2.0 - pb->a;
      alpha = alpha ? std::max(*alpha, candidate) : candidate;
    }
  }
  return alpha;
}

double t_sequence(double n) {
  if (!(n > 1.0)) return 0.0;
  const double l1 = std::log(n);
  if (!(l1 > 0.0)) return 0.0;
  const double l2 = std::log(l1);
  if (!(l2 > 0.0)) return 0.0;
  const double l3 = std::log(l2);
  const double t = l2 - l3 + l3 / l2;
  return (std::isfinite(t) && t > 0.0) ? t : 0.0;
}

double t_c_sequence(double n, double c) {
  if (!(c > 1.0)) throw DomainError("t_c_sequence requires c > 1");
  if (!(n > 1.0)) return 0.0;
  const double l1 = std::log(n);
  if (!(l1 > 1.0)) return 0.0;
  return t_sequence(n) - std::log(c) / std::log(l1);
}

}  // namespace coalsim
