#include "coalsim/measure.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "coalsim/numerics.hpp"
#include "coalsim/quadrature.hpp"

namespace coalsim {
namespace {

std::string format_number(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

bool valid_positive(double x) { return std::isfinite(x) && x > 0.0; }

void validate_density(const DensityTerm& term) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PowerBeta>) {
          if (!valid_positive(d.c) || !valid_positive(d.a) || !valid_positive(d.b)) {
            throw DomainError("power-beta parameters c, a, b must be positive");
          }
        } else {
          if (!d.density) throw DomainError("density function is empty");
          if (!valid_positive(d.a) || !valid_positive(d.b)) {
            throw DomainError("declared endpoint exponents must be positive");
          }
        }
      },
      term);
}

// Density value g(p) for 0 < p < 1.
double density_value(const DensityTerm& term, double p) {
  if (const auto* pb = std::get_if<PowerBeta>(&term)) {
    double log_g = 0.0;
    if (pb->a != 1.0) log_g += (pb->a - 1.0) * std::log(p);
    if (pb->b != 1.0) log_g += (pb->b - 1.0) * std::log1p(-p);
    return pb->c * std::exp(log_g);
  }
  return std::get<DensityFunction>(term).density(p);
}

std::pair<double, double> endpoint_exponents(const DensityTerm& term) {
  return std::visit([](const auto& d) { return std::pair{d.a, d.b}; }, term);
}

class SpecParser {
 public:
  explicit SpecParser(std::string_view text) : text_(text) {
    lowered_.reserve(text.size());
    for (char ch : text) lowered_.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }

  LambdaMeasure parse() {
    double atom_at_zero = 0.0;
    std::vector<Atom> atoms;
    std::vector<DensityTerm> densities;

    skip_space();
    if (at_end()) throw ParseError("empty measure spec", pos_);
    while (true) {
      skip_space();
      const std::size_t term_start = pos_;
      if (accept("bolthausen-sznitman")) {
        densities.emplace_back(PowerBeta{1.0, 1.0, 1.0});
      } else if (accept("kingman")) {
        double mass = 1.0;
        if (accept(":")) mass = number("kingman mass");
        if (!valid_positive(mass)) throw DomainError("kingman mass must be positive");
        atom_at_zero += mass;
      } else if (accept("powerbeta:")) {
        expect("c=");
        const double c = number("c");
        expect(",a=");
        const double a = number("a");
        expect(",b=");
        const double b = number("b");
        PowerBeta pb{c, a, b};
        validate_density(pb);
        densities.emplace_back(pb);
      } else if (accept("beta:")) {
        const double x = number("beta first parameter");
        expect(",");
        const double y = number("beta second parameter");
        if (!valid_positive(x) || !valid_positive(y)) {
          throw DomainError("beta parameters must be positive");
        }
        densities.emplace_back(PowerBeta{std::exp(-log_beta(x, y)), x, y});
      } else if (accept("dirac:")) {
        expect("p=");
        const double p = number("p");
        expect(",m=");
        const double m = number("m");
        if (!(p > 0.0 && p <= 1.0)) throw DomainError("dirac location must lie in (0,1]");
        if (!valid_positive(m)) throw DomainError("dirac mass must be positive");
        auto it = std::find_if(atoms.begin(), atoms.end(), [&](const Atom& at) { return at.location == p; });
        if (it != atoms.end()) {
          it->mass += m;
        } else {
          atoms.push_back({p, m});
        }
      } else {
        throw ParseError("unknown measure term '" + std::string(text_.substr(term_start)) + "'", term_start);
      }
      skip_space();
      if (at_end()) break;
      if (!accept("+")) throw ParseError("expected '+' between terms", pos_);
    }
    return LambdaMeasure(atom_at_zero, std::move(atoms), std::move(densities));
  }

 private:
  bool at_end() const { return pos_ >= lowered_.size(); }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(lowered_[pos_]))) ++pos_;
  }

  bool accept(std::string_view literal) {
    if (lowered_.compare(pos_, literal.size(), literal) == 0) {
      pos_ += literal.size();
      return true;
    }
    return false;
  }

  void expect(std::string_view literal) {
    if (!accept(literal)) throw ParseError("expected '" + std::string(literal) + "'", pos_);
  }

  double number(const char* what) {
    double value = 0.0;
    const char* first = lowered_.data() + pos_;
    const char* last = lowered_.data() + lowered_.size();
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr == first) {
      throw ParseError(std::string("expected a number for ") + what, pos_);
    }
    pos_ += static_cast<std::size_t>(res.ptr - first);
    return value;
  }

  std::string_view text_;
  std::string lowered_;
  std::size_t pos_ = 0;
};

}  // namespace

LambdaMeasure::LambdaMeasure(double atom_at_zero, std::vector<Atom> atoms,
                             std::vector<DensityTerm> densities)
    : atom_at_zero_(atom_at_zero), atoms_(std::move(atoms)), densities_(std::move(densities)) {
  if (!std::isfinite(atom_at_zero_) || atom_at_zero_ < 0.0) {
    throw DomainError("atom at zero must be a nonnegative finite mass");
  }
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& l, const Atom& r) { return l.location < r.location; });
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& at = atoms_[i];
    if (!(at.location > 0.0 && at.location <= 1.0)) {
      throw DomainError("atom locations must lie in (0,1]");
    }
    if (!valid_positive(at.mass)) throw DomainError("atom masses must be positive");
    if (i > 0 && atoms_[i - 1].location == at.location) {
      throw DomainError("atom locations must be pairwise distinct");
    }
  }
  for (const auto& d : densities_) validate_density(d);
  if (atom_at_zero_ == 0.0 && atoms_.empty() && densities_.empty()) {
    throw DomainError("measure must have positive total mass");
  }
}

LambdaMeasure LambdaMeasure::kingman(double mass) { return LambdaMeasure(mass, {}, {}); }

LambdaMeasure LambdaMeasure::bolthausen_sznitman() {
  return LambdaMeasure(0.0, {}, {PowerBeta{1.0, 1.0, 1.0}});
}

LambdaMeasure LambdaMeasure::power_beta(double c, double a, double b) {
  return LambdaMeasure(0.0, {}, {PowerBeta{c, a, b}});
}

LambdaMeasure LambdaMeasure::beta(double x, double y) {
  if (!valid_positive(x) || !valid_positive(y)) throw DomainError("beta parameters must be positive");
  return LambdaMeasure(0.0, {}, {PowerBeta{std::exp(-log_beta(x, y)), x, y}});
}

bool LambdaMeasure::is_kingman() const noexcept {
  return atom_at_zero_ > 0.0 && atoms_.empty() && densities_.empty();
}

bool LambdaMeasure::is_bolthausen_sznitman() const noexcept {
  if (!is_pure_power_beta()) return false;
  const auto& pb = std::get<PowerBeta>(densities_.front());
  return pb.a == 1.0 && pb.b == 1.0;
}

bool LambdaMeasure::is_pure_power_beta() const noexcept {
  return atom_at_zero_ == 0.0 && atoms_.empty() && densities_.size() == 1 &&
         std::holds_alternative<PowerBeta>(densities_.front());
}

double LambdaMeasure::total_mass(const QuadratureConfig& cfg) const {
  return integrate([](double) { return 1.0; }, cfg);
}

double LambdaMeasure::integrate(const std::function<double(double)>& f, const QuadratureConfig& cfg,
                                std::span<const double> breakpoints) const {
  double out = 0.0;
  if (atom_at_zero_ > 0.0) out += atom_at_zero_ * f(0.0);
  for (const Atom& at : atoms_) out += at.mass * f(at.location);
  if (!densities_.empty()) out += integrate_density(f, cfg, breakpoints);
  if (std::isnan(out)) throw QuadratureError("integrand produced NaN", out, out);
  return out;
}

double LambdaMeasure::integrate_density(const std::function<double(double)>& f,
                                        const QuadratureConfig& cfg,
                                        std::span<const double> breakpoints) const {
  double out = 0.0;
  for (const auto& term : densities_) out += integrate_density_term(term, f, cfg, breakpoints);
  return out;
}

std::string LambdaMeasure::serialize() const {
  std::vector<std::string> terms;
  if (atom_at_zero_ > 0.0) {
    terms.push_back(atom_at_zero_ == 1.0 ? "kingman" : "kingman:" + format_number(atom_at_zero_));
  }
  for (const auto& term : densities_) {
    const auto* pb = std::get_if<PowerBeta>(&term);
    if (!pb) throw std::logic_error("density function terms have no textual form");
    if (pb->c == 1.0 && pb->a == 1.0 && pb->b == 1.0) {
      terms.emplace_back("bolthausen-sznitman");
    } else {
      terms.push_back("powerbeta:c=" + format_number(pb->c) + ",a=" + format_number(pb->a) +
                      ",b=" + format_number(pb->b));
    }
  }
  for (const Atom& at : atoms_) {
    terms.push_back("dirac:p=" + format_number(at.location) + ",m=" + format_number(at.mass));
  }
  std::ostringstream os;
  for (std::size_t i = 0; i < terms.size(); ++i) os << (i ? "+" : "") << terms[i];
  return os.str();
}

LambdaMeasure parse_measure(std::string_view spec) { return SpecParser(spec).parse(); }

std::vector<double> geometric_breakpoints(double scale) {
  std::vector<double> out;
  if (!(scale > 0.0)) return out;
  for (double p = scale / 16.0; p < 0.5; p *= 4.0) {
    if (p > 1e-300) out.push_back(p);
  }
  return out;
}

double integrate_density_term(const DensityTerm& term, const std::function<double(double)>& f,
                              const QuadratureConfig& cfg, std::span<const double> breakpoints) {
  const auto [a, b] = endpoint_exponents(term);
  const auto* pb = std::get_if<PowerBeta>(&term);

  std::vector<double> edges{0.0, 0.5, 1.0};
  for (double x : breakpoints) {
    if (x > 0.0 && x < 1.0) edges.push_back(x);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  const auto split = std::find(edges.begin(), edges.end(), 0.5);
  std::vector<double> left(edges.begin(), split + 1);
  std::vector<double> right(split, edges.end());

  double value = 0.0;

  // [0, 1/2]: p = v^(1/a)/2 turns p^(a-1) dp into a constant multiple of dv.
  if (a < 1.0) {
    for (double& e : left) e = std::pow(2.0 * e, a);
    auto g = [&](double v) {
      const double p = 0.5 * std::pow(v, 1.0 / a);
      if (pb) {
        const double tail = pb->b == 1.0 ? 1.0 : std::exp((pb->b - 1.0) * std::log1p(-p));
        return f(p) * pb->c * tail * std::exp2(-a) / a;
      }
      if (p <= 0.0) return 0.0;
      return f(p) * density_value(term, p) * p / (a * v);
    };
    value += adaptive_integrate(g, left, cfg).value;
  } else {
    auto g = [&](double p) { return f(p) * density_value(term, p); };
    value += adaptive_integrate(g, left, cfg).value;
  }

  // [1/2, 1]: 1-p = w^(1/b)/2 likewise for (1-p)^(b-1).
  if (b < 1.0) {
    std::vector<double> mapped;
    for (auto it = right.rbegin(); it != right.rend(); ++it) mapped.push_back(std::pow(2.0 * (1.0 - *it), b));
    auto g = [&](double w) {
      const double q = 0.5 * std::pow(w, 1.0 / b);
      const double p = 1.0 - q;
      if (pb) {
        const double head = pb->a == 1.0 ? 1.0 : std::exp((pb->a - 1.0) * std::log(p));
        return f(p) * pb->c * head * std::exp2(-b) / b;
      }
      if (q <= 0.0) return 0.0;
      return f(p) * density_value(term, p) * q / (b * w);
    };
    value += adaptive_integrate(g, mapped, cfg).value;
  } else {
    auto g = [&](double p) { return f(p) * density_value(term, p); };
    value += adaptive_integrate(g, right, cfg).value;
  }
  return value;
}

}  // namespace coalsim
