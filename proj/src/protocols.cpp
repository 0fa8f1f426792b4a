#include "qsense/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qsense/errors.hpp"
#include "qsense/lambert_w.hpp"
#include "qsense/stabilization.hpp"

namespace qsense {

const char* to_string(Mode m) { return m == Mode::per_shot ? "per_shot" : "per_root_time"; }

const char* to_string(TimingBranch b) {
  switch (b) {
    case TimingBranch::ramsey_vy: return "ramsey_vy";
    case TimingBranch::ramsey_snr: return "ramsey_snr";
    case TimingBranch::stable_vy: return "stable_vy";
    case TimingBranch::stable_snr: return "stable_snr";
    case TimingBranch::breakdown_vy: return "breakdown_vy";
    case TimingBranch::breakdown_snr: return "breakdown_snr";
  }
  return "unknown";
}

double ramsey_vy(double delta, double gamma_2, double t) {
  if (!(t >= 0.0)) throw DomainError("ramsey_vy requires t >= 0");
  return std::sin(delta * t) * std::exp(-gamma_2 * t);
}

RamseyOptimum ramsey_optimum(double delta, double gamma_2, Mode mode) {
  if (!(gamma_2 > 0.0) && delta == 0.0) throw DomainError("Ramsey optimum undefined without decay or detuning");
  RamseyOptimum out;
  const double d = std::abs(delta);
  if (mode == Mode::per_shot) {
    out.timing.branch = TimingBranch::ramsey_vy;
    out.timing.t_meas = d == 0.0 ? 1.0 / gamma_2 : std::atan2(d, gamma_2) / d;
    out.value = ramsey_vy(delta, gamma_2, out.timing.t_meas);
    return out;
  }
  out.timing.branch = TimingBranch::ramsey_snr;
  if (d == 0.0) {
    out.timing.t_meas = 0.5 / gamma_2;
    return out;
  }
  // d/dt [sin(d t) e^{-g t} / sqrt t] = 0  <=>  d cos(d t) = (g + 1/(2t)) sin(d t),
  // with a single root inside (0, pi/(2d)).
  auto stationarity = [&](double t) { return d * std::cos(d * t) - (gamma_2 + 0.5 / t) * std::sin(d * t); };
  double lo = 0.0;
  double hi = 0.5 * std::numbers::pi / d;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid > 0.0 && stationarity(mid) > 0.0 ? lo : hi) = mid;
  }
  out.timing.t_meas = 0.5 * (lo + hi);
  out.value = ramsey_vy(delta, gamma_2, out.timing.t_meas) / std::sqrt(out.timing.t_meas);
  return out;
}

double stabilized_vy(double t, double v_x0, double delta, double gamma_2) {
  if (!(t >= 0.0)) throw DomainError("stabilized_vy requires t >= 0");
  if (gamma_2 == 0.0) return v_x0 * delta * t;
  return -std::expm1(-gamma_2 * t) * v_x0 * delta / gamma_2;
}

double post_breakdown_vy(double t_prime, double v_x0, double tau_b, double delta, double gamma_2) {
  if (!(t_prime >= 0.0)) throw DomainError("post_breakdown_vy requires t' >= 0");
  if (!(gamma_2 > 0.0)) throw DomainError("post_breakdown_vy requires gamma_2 > 0");
  const double at_breakdown = -std::expm1(-tau_b) * v_x0 * delta / gamma_2;
  return (at_breakdown + v_x0 * delta * t_prime) * std::exp(-gamma_2 * t_prime);
}

double protocol_vy(double t, double v_x0, const DecoherenceParams& p, double delta) {
  const auto bd = breakdown_time(InitialState::from_vx(v_x0), p);
  if (bd.stable() || t <= bd.t_b) return stabilized_vy(t, v_x0, delta, p.gamma_2());
  return post_breakdown_vy(t - bd.t_b, v_x0, bd.tau_b, delta, p.gamma_2());
}

double stable_snr_time_over_t2() {
  static const double t = -0.5 * (1.0 + 2.0 * lambert_w_minus1(-0.5 / std::sqrt(std::numbers::e)));
  return t;
}

double post_breakdown_snr_offset(double tau_b) {
  if (!(tau_b >= 0.0)) throw DomainError("tau_b must be non-negative");
  if (std::isinf(tau_b)) return -std::numeric_limits<double>::infinity();
  // Closed form multiplied through by e^{-tau_b}; the difference of the root
  // and 2 tau_b + 1 is rationalized to avoid cancellation at large tau_b.
  const double u = std::exp(-tau_b);
  const double b = 2.0 * tau_b + 1.0;
  const double a = 4.0 * u * b + (4.0 * tau_b * (tau_b + 1.0) - 7.0) + 4.0 * u * u;
  const double root_minus_b = (4.0 * u * b + 4.0 * u * u - 8.0) / (std::sqrt(std::max(a, 0.0)) + b);
  return 0.25 * (root_minus_b + 2.0 * u);
}

ProtocolTiming optimal_time(double v_x0, const DecoherenceParams& p, Mode mode, double stable_horizon_over_t2) {
  const double g2 = p.gamma_2();
  if (!(g2 > 0.0)) throw DomainError("optimal_time requires gamma_2 > 0");
  const auto bd = breakdown_time(InitialState::from_vx(v_x0), p);
  ProtocolTiming out;
  out.t_b = bd.t_b;

  if (mode == Mode::per_shot) {
    if (bd.stable()) {
      out.branch = TimingBranch::stable_vy;
      out.t_meas = stable_horizon_over_t2 / g2;
      out.asymptotic = true;
    } else {
      out.branch = TimingBranch::breakdown_vy;
      out.t_meas = bd.t_b + std::exp(-bd.tau_b) / g2;
    }
    return out;
  }

  const double t_stable = stable_snr_time_over_t2() / g2;
  out.branch = TimingBranch::stable_snr;
  out.t_meas = bd.stable() ? t_stable : std::min(t_stable, bd.t_b);
  if (bd.stable() || v_x0 == 0.0) return out;

  // Compare the best pre-breakdown time with the post-breakdown stationary point.
  const double offset = post_breakdown_snr_offset(bd.tau_b) / g2;
  if (offset > 0.0) {
    const double t_post = bd.t_b + offset;
    auto objective = [&](double t) { return protocol_vy(t, v_x0, p, 1.0) / std::sqrt(t); };
    if (out.t_meas <= 0.0 || objective(t_post) >= objective(out.t_meas)) {
      out.branch = TimingBranch::breakdown_snr;
      out.t_meas = t_post;
    }
  }
  return out;
}

}  // namespace qsense
