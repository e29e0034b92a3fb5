#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bcev::summary {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};

/// Sample mean and its standard error (sample sd / sqrt(n)).
MeanSe mean_se(std::span<const double> values);

/// Mean and SE of a - b over paired observations.
MeanSe paired_difference(std::span<const double> a, std::span<const double> b);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares of y on x.
LinearFit regress(std::span<const double> x, std::span<const double> y);

/// Empirical quantile with linear interpolation (type 7).
double quantile(std::vector<double> values, double p);
double median(std::vector<double> values);

}  // namespace bcev::summary
