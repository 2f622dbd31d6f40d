#include "coalsim/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace coalsim {
namespace {

using Rule = boost::math::quadrature::gauss<double, 20>;

constexpr int kMaxSplits = 6000;

struct Panel {
  double lo;
  double hi;
  double left;   // rule applied to [lo, mid]
  double right;  // rule applied to [mid, hi]
  double error;
  unsigned depth;
  bool operator<(const Panel& o) const { return error < o.error; }
  double value() const { return left + right; }
};

Panel make_panel(const std::function<double(double)>& f, double lo, double hi, double whole,
                 unsigned depth) {
  const double mid = 0.5 * (lo + hi);
  const double left = Rule::integrate(f, lo, mid);
  const double right = Rule::integrate(f, mid, hi);
  return {lo, hi, left, right, std::abs(left + right - whole), depth};
}

}  // namespace

QuadratureResult adaptive_integrate(const std::function<double(double)>& f,
                                    std::span<const double> edges, const QuadratureConfig& cfg) {
  std::priority_queue<Panel> queue;
  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double lo = edges[i];
    const double hi = edges[i + 1];
    if (!(hi > lo)) continue;
    Panel p = make_panel(f, lo, hi, Rule::integrate(f, lo, hi), 0);
    total += p.value();
    total_error += p.error;
    queue.push(p);
  }
  if (!std::isfinite(total)) {
    throw QuadratureError("non-finite integrand value", total, total_error);
  }

  auto tolerance = [&] { return std::max(cfg.rel_tol * std::abs(total), cfg.abs_tol); };

  double stuck_error = 0.0;
  int splits = 0;
  while (!queue.empty() && total_error > tolerance() && splits < kMaxSplits) {
    Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi) || worst.depth >= cfg.max_depth) {
      // Cannot bisect further; its error stays on the books.
      stuck_error += worst.error;
      total_error -= worst.error;
      queue.push({worst.lo, worst.hi, worst.left, worst.right, 0.0, worst.depth});
      ++splits;
      continue;
    }
    Panel a = make_panel(f, worst.lo, mid, worst.left, worst.depth + 1);
    Panel b = make_panel(f, mid, worst.hi, worst.right, worst.depth + 1);
    total += a.value() + b.value() - worst.value();
    total_error += a.error + b.error - worst.error;
    if (!std::isfinite(total)) {
      throw QuadratureError("non-finite integrand value", total, total_error);
    }
    queue.push(a);
    queue.push(b);
    ++splits;
  }
  // Re-sum to shed accumulated cancellation in the running totals.
  total = 0.0;
  total_error = stuck_error;
  while (!queue.empty()) {
    total += queue.top().value();
    total_error += queue.top().error;
    queue.pop();
  }
  if (total_error > std::max(cfg.rel_tol * std::abs(total), cfg.abs_tol)) {
    throw QuadratureError("quadrature did not converge", total, total_error);
  }
  return {total, total_error};
}

QuadratureResult adaptive_integrate(const std::function<double(double)>& f, double lo, double hi,
                                    const QuadratureConfig& cfg) {
  const double edges[2] = {lo, hi};
  return adaptive_integrate(f, std::span<const double>(edges, 2), cfg);
}

}  // namespace coalsim
