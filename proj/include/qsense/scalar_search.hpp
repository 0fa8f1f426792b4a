#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

namespace qsense {

struct ScalarMax {
  double x = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

// Best of n equally spaced samples on [a, b] (endpoints included).
template <class F>
ScalarMax scan_maximize(F&& f, double a, double b, std::size_t n) {
  ScalarMax best;
  if (n < 2) n = 2;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    const double v = f(x);
    if (v > best.value) best = {x, v};
  }
  return best;
}

// Golden-section search for the maximum of a unimodal f on [a, b].
template <class F>
ScalarMax golden_section_maximize(F&& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
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
  const double fx = f(x);
  ScalarMax best{x, fx};
  if (fc > best.value) best = {c, fc};
  if (fd > best.value) best = {d, fd};
  return best;
}

// Coarse scan, then golden-section refinement inside the neighbouring cells.
template <class F>
ScalarMax bracket_and_refine(F&& f, double a, double b, std::size_t n_scan, double tol) {
  const ScalarMax coarse = scan_maximize(f, a, b, n_scan);
  const double h = (b - a) / static_cast<double>(n_scan - 1);
  const double lo = std::fmax(a, coarse.x - h);
  const double hi = std::fmin(b, coarse.x + h);
  const ScalarMax fine = golden_section_maximize(f, lo, hi, tol);
  return fine.value >= coarse.value ? fine : coarse;
}

}  // namespace qsense
