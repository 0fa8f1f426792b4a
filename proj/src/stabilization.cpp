#include "qsense/stabilization.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qsense/errors.hpp"

namespace qsense {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this g1/g2 the closed form loses digits to its 1/g1 prefactor.
constexpr double kSmallRelaxation = 1e-8;

}  // namespace

InitialState InitialState::from_theta(double theta) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi / 2.0))
    throw DomainError("theta must lie in [0, pi/2]");
  const double vx = std::sin(theta);
  const double vz = theta == std::numbers::pi / 2.0 ? 0.0 : std::cos(theta);
  return InitialState(theta, vx, vz);
}

InitialState InitialState::from_vx(double v_x0) {
  if (!(v_x0 >= 0.0 && v_x0 <= 1.0)) throw DomainError("v_x0 must lie in [0, 1]");
  return InitialState(std::asin(v_x0), v_x0, std::sqrt((1.0 - v_x0) * (1.0 + v_x0)));
}

double control_field(double v_z, double v_x0, double gamma_2) {
  if (v_z == 0.0) throw SingularControlError("stabilizing control is singular at v_z = 0");
  return gamma_2 * v_x0 / (2.0 * v_z);
}

double stability_threshold(const DecoherenceParams& p) {
  if (p.gamma_2() == 0.0) return 0.0;
  return 0.5 * p.eta() * std::sqrt(p.gamma_1() / p.gamma_2());
}

bool is_stable(double v_x0, const DecoherenceParams& p) {
  if (p.gamma_1() == 0.0) return v_x0 == 0.0;
  return v_x0 <= stability_threshold(p);
}

BreakdownResult breakdown_time(const InitialState& init, const DecoherenceParams& p) {
  const double vx = init.v_x0();
  const double vz = init.v_z0();
  const double g1 = p.gamma_1();
  const double g2 = p.gamma_2();
  const double eta = p.eta();
  BreakdownResult out;
  if (is_stable(vx, p)) return out;
  if (!(g2 > 0.0)) throw DomainError("breakdown time needs gamma_2 > 0");

  if (g1 < kSmallRelaxation * g2) {
    // g1 -> 0: dz/dt = -g2 vx^2 / z integrates to z^2 = z0^2 - 2 g2 vx^2 t.
    out.t_b = vz * vz / (2.0 * g2 * vx * vx);
    out.tau_b = g2 * out.t_b;
    out.alpha = g1 > 0.0 ? std::sqrt(4.0 * vx * vx * g2 / g1 - eta * eta) : kInf;
    return out;
  }

  const double alpha2 = 4.0 * vx * vx * g2 / g1 - eta * eta;
  if (!(alpha2 > 0.0))
    throw std::logic_error("breakdown_time: unstable state with non-positive alpha^2");
  const double alpha = std::sqrt(alpha2);
  // ln((a^2 + (2z - eta)^2) / (a^2 + eta^2)) = log1p(4 z (z - eta) / (a^2 + eta^2))
  const double log_term = std::log1p(4.0 * vz * (vz - eta) / (alpha2 + eta * eta));
  const double atan_term = (2.0 / alpha) * (std::atan((2.0 * vz - eta) / alpha) + std::atan(eta / alpha));
  out.t_b = (log_term + atan_term) / (2.0 * g1);
  out.tau_b = g2 * out.t_b;
  out.alpha = alpha;
  return out;
}

ControlSchedule build_schedule(const InitialState& init, const DecoherenceParams& p) {
  return build_schedule(init, p, kDefaultCapOverGamma2 * p.gamma_2());
}

ControlSchedule build_schedule(const InitialState& init, const DecoherenceParams& p, double h_max) {
  if (!(h_max > 0.0)) throw DomainError("h_max must be positive");
  const double vx = init.v_x0();
  if (vx == 0.0) return ControlSchedule::zero();

  const TrackingLaw law{vx, init.v_z0(), p.gamma_1(), p.gamma_2(), p.eta()};
  // |h| > h_max  <=>  z_ref < z_cut (z_ref stays positive before breakdown).
  const double z_cut = p.gamma_2() * vx / (2.0 * h_max);
  if (!(law.v_z0 > z_cut)) return ControlSchedule::tracking(law, h_max, 0.0);

  if (is_stable(vx, p)) {
    // z_ref relaxes monotonically to the upper root of g1 z^2 - g1 eta z + g2 vx^2 = 0.
    const double disc = std::max(0.0, p.eta() * p.eta() - 4.0 * p.gamma_2() * vx * vx / p.gamma_1());
    const double z_fixed = 0.5 * (p.eta() + std::sqrt(disc));
    if (std::min(z_fixed, law.v_z0) > z_cut) return ControlSchedule::tracking(law, h_max, std::nullopt);
  }

  auto rhs = [&law](double, const ode::State<1>& z) { return ode::State<1>{law.reference_rate(z[0])}; };
  auto stepper = ode::make_stepper<1>(rhs, default_tolerance());
  auto above_cut = [z_cut](double, const ode::State<1>& z) { return z[0] - z_cut; };
  // Event-location time tolerance, in units of T2.
  const double t_tol = 1e-9 / p.gamma_2();
  double t = 0.0;
  ode::State<1> z{law.v_z0};
  const double chunk = 100.0 / p.gamma_2();
  for (int i = 0; i < 10000; ++i) {
    const auto hit = stepper.advance_until(t, z, t + chunk, above_cut, t_tol);
    if (hit.found) return ControlSchedule::tracking(law, h_max, hit.t);
    t = hit.t;
    z = hit.y;
  }
  throw IntegrationError("reference trajectory never reached the amplitude cap", t);
}

}  // namespace qsense
