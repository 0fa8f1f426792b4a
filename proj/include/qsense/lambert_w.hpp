#pragma once

namespace qsense {

// Lower real branch W_{-1}(x) for x in [-1/e, 0): the solution w <= -1 of
// w e^w = x. Halley iteration; residual |w e^w - x| <= 1e-12.
double lambert_w_minus1(double x);

}  // namespace qsense
