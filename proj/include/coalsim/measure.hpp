#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "coalsim/errors.hpp"

namespace coalsim {

struct QuadratureConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
  unsigned max_depth = 30;  // bisection levels below each initial panel
};

/// Density c * p^(a-1) * (1-p)^(b-1) on (0,1). Beta(x,y) is the case
/// c = 1/B(x,y); the uniform density (c=a=b=1) gives Bolthausen-Sznitman.
struct PowerBeta {
  double c = 1.0;
  double a = 1.0;
  double b = 1.0;
  bool operator==(const PowerBeta&) const = default;
};

/// User-supplied pointwise density. `a` and `b` declare the endpoint
/// behaviour p^(a-1) near 0 and (1-p)^(b-1) near 1; quadrature relies on
/// them to remove the endpoint singularities.
struct DensityFunction {
  std::function<double(double)> density;
  double a = 1.0;
  double b = 1.0;
  std::string label;
  bool operator==(const DensityFunction& o) const {
    return a == o.a && b == o.b && label == o.label;
  }
};

using DensityTerm = std::variant<PowerBeta, DensityFunction>;

struct Atom {
  double location = 1.0;  // in (0,1]
  double mass = 0.0;
  bool operator==(const Atom&) const = default;
};

/// Finite, non-vanishing measure on [0,1]: an atom at zero, finitely many
/// atoms in (0,1] and a sum of absolutely continuous density terms.
/// Immutable once constructed.
class LambdaMeasure {
 public:
  LambdaMeasure(double atom_at_zero, std::vector<Atom> atoms, std::vector<DensityTerm> densities);

  static LambdaMeasure kingman(double mass = 1.0);
  static LambdaMeasure bolthausen_sznitman();
  static LambdaMeasure power_beta(double c, double a, double b);
  /// Normalized Beta(x,y) probability density.
  static LambdaMeasure beta(double x, double y);

  double atom_at_zero() const noexcept { return atom_at_zero_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<DensityTerm>& densities() const noexcept { return densities_; }

  bool is_kingman() const noexcept;
  bool is_bolthausen_sznitman() const noexcept;
  /// True when the measure is exactly one power-beta density term.
  bool is_pure_power_beta() const noexcept;

  double total_mass(const QuadratureConfig& cfg = {}) const;

  /// ∫ f dΛ = f(0)Λ({0}) + Σ f(p_i) m_i + Σ ∫ f g_j. `breakpoints` in (0,1)
  /// mark places where f changes character (kinks, scale changes).
  double integrate(const std::function<double(double)>& f, const QuadratureConfig& cfg = {},
                   std::span<const double> breakpoints = {}) const;

  /// Density part only: Σ_j ∫ f g_j.
  double integrate_density(const std::function<double(double)>& f,
                           const QuadratureConfig& cfg = {},
                           std::span<const double> breakpoints = {}) const;

  /// Canonical spec text; parse_measure(serialize()) reproduces the measure.
  /// Throws std::logic_error for measures holding a DensityFunction.
  std::string serialize() const;

  bool operator==(const LambdaMeasure&) const = default;

 private:
  double atom_at_zero_;
  std::vector<Atom> atoms_;
  std::vector<DensityTerm> densities_;
};

/// Parse a measure spec (case-insensitive):
///   spec := term ("+" term)*
///   term := "kingman" [":" mass] | "bolthausen-sznitman" | "beta:" x "," y
///         | "powerbeta:c=" c ",a=" a ",b=" b | "dirac:p=" p ",m=" mass
LambdaMeasure parse_measure(std::string_view spec);

/// ∫_0^1 f(p) g(p) dp for a single density term, with endpoint substitutions
/// driven by the term's exponents.
double integrate_density_term(const DensityTerm& term, const std::function<double(double)>& f,
                              const QuadratureConfig& cfg = {},
                              std::span<const double> breakpoints = {});

/// Breakpoints scale*4^j (j >= -2) inside (0,1/2), for integrands whose
/// structure sits on the scale `scale` near p = 0.
std::vector<double> geometric_breakpoints(double scale);

}  // namespace coalsim
