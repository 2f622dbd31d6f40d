#include "coalsim/stats.hpp"

#include <algorithm>
#include <cmath>

#include "coalsim/errors.hpp"

namespace coalsim {

double ks_statistic(std::span<const double> sorted_samples, const std::function<double(double)>& cdf) {
  if (sorted_samples.empty()) throw DomainError("ks_statistic requires samples");
  const double m = static_cast<double>(sorted_samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted_samples.size(); ++i) {
    const double f = cdf(sorted_samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample requires two nonempty samples");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.count);
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / static_cast<double>(s.count - 1);
    s.se = std::sqrt(s.variance / static_cast<double>(s.count));
  }
  return s;
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("correlation needs paired samples");
  const Summary sx = summarize(x);
  const Summary sy = summarize(y);
  double cov = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) cov += (x[i] - sx.mean) * (y[i] - sy.mean);
  cov /= static_cast<double>(x.size() - 1);
  return cov / std::sqrt(sx.variance * sy.variance);
}

double joint_product_gap(std::span<const double> x, std::span<const double> y,
                         std::span<const double> grid_x, std::span<const double> grid_y) {
  if (x.size() != y.size() || x.empty()) throw DomainError("joint_product_gap needs paired samples");
  const double m = static_cast<double>(x.size());
  double gap = 0.0;
  for (double gx : grid_x) {
    for (double gy : grid_y) {
      std::size_t cx = 0, cy = 0, cxy = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const bool bx = x[i] <= gx;
        const bool by = y[i] <= gy;
        cx += bx;
        cy += by;
        cxy += bx && by;
      }
      gap = std::max(gap, std::abs(cxy / m - (cx / m) * (cy / m)));
    }
  }
  return gap;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw DomainError("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace coalsim
