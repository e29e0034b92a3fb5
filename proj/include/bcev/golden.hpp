#pragma once

#include <cmath>
#include <limits>

namespace bcev {

struct ScalarOptimum {
  double argmax;
  double value;
};

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
/// -inf values are treated as the worst possible objective.
template <typename F>
ScalarOptimum golden_section_maximize(F&& f, double lo, double hi, double tolerance = 1e-6) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tolerance) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

}  // namespace bcev
