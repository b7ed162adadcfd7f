#pragma once

#include <cmath>
#include <cstddef>

namespace cran {

struct GoldenSectionOptions {
  double abs_tol = 0.0;       // stop once the bracket is narrower than this ...
  double rel_tol = 1e-7;      // ... and narrower than rel_tol * lower end
  std::size_t max_iterations = 300;
};

/// Maximizes a unimodal function on [lo, hi] by golden-section search and
/// returns the midpoint of the final bracket.
template <class F>
double golden_section_maximize(F&& f, double lo, double hi, const GoldenSectionOptions& opts) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    const double width = hi - lo;
    if (width <= opts.abs_tol && width <= opts.rel_tol * lo) break;
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace cran
