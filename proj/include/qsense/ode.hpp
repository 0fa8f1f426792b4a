#pragma once

// Adaptive Dormand-Prince 5(4) integrator for small fixed-size systems.
//
// The stepper always lands exactly on requested output times. Event location
// bisects inside an accepted step, evaluating intermediate states with a fresh
// single step from the step's left end (never by interpolation).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "qsense/errors.hpp"

namespace qsense::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Tolerance {
  double abs = 1e-12;
  double rel = 1e-10;
  double min_step = 1e-14;
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 20'000'000;
};

template <std::size_t N>
struct EventHit {
  bool found = false;
  double t = 0.0;
  State<N> y{};
};

// Rhs: callable State<N>(double t, const State<N>& y).
template <std::size_t N, class Rhs>
class DormandPrince {
 public:
  explicit DormandPrince(Rhs rhs, Tolerance tol = {}) : rhs_(std::move(rhs)), tol_(tol) {}

  const Tolerance& tolerance() const { return tol_; }

  // Integrates from (t, y) to t_end and returns y(t_end).
  State<N> advance(double t, State<N> y, double t_end) {
    auto never = [](double, const State<N>&) { return 1.0; };
    return advance_until(t, y, t_end, never, 0.0).y;
  }

  // Integrates until g(t, y) first becomes <= 0 (starting from g > 0) or t_end.
  // On a hit, t is the last time with g > 0 to within t_tol and y is the state
  // there. Without a hit, t = t_end.
  template <class Event>
  EventHit<N> advance_until(double t, State<N> y, double t_end, Event&& g, double t_tol) {
    EventHit<N> out;
    if (t_end <= t) {
      out.t = t;
      out.y = y;
      return out;
    }
    State<N> f = rhs_(t, y);
    double h = initial_step(t, y, f, t_end);
    double g_prev = g(t, y);
    std::size_t steps = 0;

    while (t < t_end) {
      if (++steps > tol_.max_steps) throw IntegrationError("step limit exceeded", t);
      bool last = false;
      if (t + h >= t_end || t_end - (t + h) < tol_.min_step) {
        h = t_end - t;
        last = true;
      }
      State<N> y_new, f_new;
      const double err = attempt(t, y, f, h, y_new, f_new);
      if (!(err <= 1.0)) {
        double shrink = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.1;
        h *= shrink;
        if (h < tol_.min_step * std::max(1.0, std::abs(t)))
          throw IntegrationError("step-size underflow", t);
        continue;
      }
      const double t_new = last ? t_end : t + h;
      const double g_new = g(t_new, y_new);
      if (g_prev > 0.0 && g_new <= 0.0) {
        locate(t, y, f, t_new, g, t_tol, out);
        return out;
      }
      t = t_new;
      y = y_new;
      f = f_new;
      g_prev = g_new;
      if (last) break;
      const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h = std::min(h * grow, tol_.max_step);
    }
    out.t = t_end;
    out.y = y;
    return out;
  }

 private:
  double initial_step(double t, const State<N>& y, const State<N>& f, double t_end) const {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = tol_.abs + tol_.rel * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(f[i]) / sc);
    }
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min({h, t_end - t, tol_.max_step});
    return std::max(h, tol_.min_step);
  }

  // One Dormand-Prince step of size h; returns the scaled error norm.
  double attempt(double t, const State<N>& y, const State<N>& k1, double h, State<N>& y_out,
                 State<N>& k7) {
    State<N> tmp, k2, k3, k4, k5, k6;
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (1.0 / 5.0) * k1[i];
    k2 = rhs_(t + h / 5.0, tmp);
    for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (3.0 / 40.0 * k1[i] + 9.0 / 40.0 * k2[i]);
    k3 = rhs_(t + 3.0 * h / 10.0, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (44.0 / 45.0 * k1[i] - 56.0 / 15.0 * k2[i] + 32.0 / 9.0 * k3[i]);
    k4 = rhs_(t + 4.0 * h / 5.0, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (19372.0 / 6561.0 * k1[i] - 25360.0 / 2187.0 * k2[i] +
                           64448.0 / 6561.0 * k3[i] - 212.0 / 729.0 * k4[i]);
    k5 = rhs_(t + 8.0 * h / 9.0, tmp);
    for (std::size_t i = 0; i < N; ++i)
      tmp[i] = y[i] + h * (9017.0 / 3168.0 * k1[i] - 355.0 / 33.0 * k2[i] + 46732.0 / 5247.0 * k3[i] +
                           49.0 / 176.0 * k4[i] - 5103.0 / 18656.0 * k5[i]);
    k6 = rhs_(t + h, tmp);
    for (std::size_t i = 0; i < N; ++i)
      y_out[i] = y[i] + h * (35.0 / 384.0 * k1[i] + 500.0 / 1113.0 * k3[i] + 125.0 / 192.0 * k4[i] -
                             2187.0 / 6784.0 * k5[i] + 11.0 / 84.0 * k6[i]);
    k7 = rhs_(t + h, y_out);

    double err = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double e = h * (71.0 / 57600.0 * k1[i] - 71.0 / 16695.0 * k3[i] + 71.0 / 1920.0 * k4[i] -
                            17253.0 / 339200.0 * k5[i] + 22.0 / 525.0 * k6[i] - 1.0 / 40.0 * k7[i]);
      const double sc = tol_.abs + tol_.rel * std::max(std::abs(y[i]), std::abs(y_out[i]));
      if (!std::isfinite(y_out[i])) return std::numeric_limits<double>::infinity();
      err = std::max(err, std::abs(e) / sc);
    }
    return err;
  }

  template <class Event>
  void locate(double t0, const State<N>& y0, const State<N>& f0, double t1, Event& g, double t_tol,
              EventHit<N>& out) {
    double lo = t0, hi = t1;
    State<N> y_lo = y0;
    State<N> y_mid, f_scratch;
    while (hi - lo > t_tol && hi - lo > tol_.min_step) {
      const double mid = 0.5 * (lo + hi);
      attempt(t0, y0, f0, mid - t0, y_mid, f_scratch);
      if (g(mid, y_mid) > 0.0) {
        lo = mid;
        y_lo = y_mid;
      } else {
        hi = mid;
      }
    }
    out.found = true;
    out.t = lo;
    out.y = y_lo;
  }

  Rhs rhs_;
  Tolerance tol_;
};

template <std::size_t N, class Rhs>
DormandPrince<N, Rhs> make_stepper(Rhs rhs, Tolerance tol = {}) {
  return DormandPrince<N, Rhs>(std::move(rhs), tol);
}

}  // namespace qsense::ode
