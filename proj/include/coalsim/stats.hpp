#pragma once

#include <functional>
#include <span>
#include <vector>

namespace coalsim {

/// One-sample Kolmogorov-Smirnov distance sup_x |F_m(x) - F(x)| for sorted
/// samples and a continuous CDF.
double ks_statistic(std::span<const double> sorted_samples, const std::function<double(double)>& cdf);

/// Two-sample distance sup_x |F_m(x) - G_k(x)| for sorted samples; ties are
/// stepped over together.
double ks_two_sample(std::span<const double> sorted_a, std::span<const double> sorted_b);

struct Summary {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double se = 0.0;        // standard error of the mean
  std::size_t count = 0;
};

/// Two-pass mean/variance over values in the given order.
Summary summarize(std::span<const double> values);

/// Pearson correlation.
double correlation(std::span<const double> x, std::span<const double> y);

/// sup over the grid of |P(X<=a, Y<=b) - P(X<=a)P(Y<=b)|, empirically.
double joint_product_gap(std::span<const double> x, std::span<const double> y,
                         std::span<const double> grid_x, std::span<const double> grid_y);

/// Empirical q-quantile (type 7) of sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace coalsim
