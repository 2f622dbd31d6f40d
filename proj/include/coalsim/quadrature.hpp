#pragma once

#include <functional>
#include <span>

#include "coalsim/measure.hpp"

namespace coalsim {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Globally adaptive 20-point Gauss-Legendre quadrature over the panels
/// [edges[0],edges[1]], [edges[1],edges[2]], ... . The worst panel is bisected
/// until the summed error estimate |G(panel) - G(halves)| drops below
/// max(rel_tol*|value|, abs_tol). Throws QuadratureError otherwise, or when
/// the integrand produces a non-finite value.
QuadratureResult adaptive_integrate(const std::function<double(double)>& f,
                                    std::span<const double> edges, const QuadratureConfig& cfg);

/// Convenience overload for a single interval.
QuadratureResult adaptive_integrate(const std::function<double(double)>& f, double lo, double hi,
                                    const QuadratureConfig& cfg);

}  // namespace coalsim
