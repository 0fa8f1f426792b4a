#include "qsense/lambert_w.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "qsense/errors.hpp"

namespace qsense {

double lambert_w_minus1(double x) {
  constexpr double kBranchPoint = -1.0 / std::numbers::e;
  if (!(x >= kBranchPoint - 1e-17 && x < 0.0)) throw DomainError("lambert_w_minus1: x outside [-1/e, 0)");
  if (x <= kBranchPoint) return -1.0;

  double w;
  if (x < -0.25) {
    // Expansion about the branch point in p = -sqrt(2 (1 + e x)).
    const double p = -std::sqrt(2.0 * (1.0 + std::numbers::e * x));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else {
    const double l1 = std::log(-x);
    w = l1 - std::log(-l1);
  }

  for (int it = 0; it < 64; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w)) break;
  }
  return w;
}

}  // namespace qsense
