#include "qsense/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsense/errors.hpp"

namespace qsense {

double BlochState::norm() const { return std::sqrt(x * x + y * y + z * z); }

DecoherenceParams DecoherenceParams::from_rates(double gamma_1, double gamma_2, double eta) {
  if (!std::isfinite(gamma_1) || !std::isfinite(gamma_2) || gamma_1 < 0.0 || gamma_2 < 0.0)
    throw DomainError("decoherence rates must be finite and non-negative");
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0, 1]");
  double gamma_phi = gamma_2 - 0.5 * gamma_1;
  if (gamma_phi < 0.0) {
    if (gamma_phi < -1e-12 * gamma_2)
      throw DomainError("gamma_1 > 2 gamma_2 implies negative pure dephasing");
    gamma_phi = 0.0;
  }
  return DecoherenceParams(gamma_1, gamma_2, gamma_phi, eta);
}

DecoherenceParams DecoherenceParams::from_dephasing(double gamma_1, double gamma_phi, double eta) {
  if (!std::isfinite(gamma_phi) || gamma_phi < 0.0) throw DomainError("gamma_phi must be non-negative");
  return from_rates(gamma_1, gamma_phi + 0.5 * gamma_1, eta);
}

DecoherenceParams DecoherenceParams::from_times(double t1, double t2, double eta) {
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw DomainError("T1 and T2 must be positive");
  return from_rates(std::isinf(t1) ? 0.0 : 1.0 / t1, 1.0 / t2, eta);
}

DecoherenceParams DecoherenceParams::from_t1_over_t2(double t1_over_t2, double eta) {
  return from_times(t1_over_t2, 1.0, eta);
}

double DecoherenceParams::t1_over_t2() const {
  if (gamma_1_ == 0.0) return std::numeric_limits<double>::infinity();
  return gamma_2_ / gamma_1_;
}

double eta_from_temperature(double beta, double omega01) {
  if (!(beta >= 0.0)) throw DomainError("inverse temperature must be non-negative");
  if (!(omega01 > 0.0)) throw DomainError("qubit gap must be positive");
  const double boltz = std::exp(-beta * omega01);
  // tanh(b w / 2) written out, exact at both limits.
  return (1.0 - boltz) / (1.0 + boltz);
}

BlochState bloch_derivative(const BlochState& v, const DecoherenceParams& p, double h_y, double delta) {
  const double g1 = p.gamma_1();
  const double g2 = p.gamma_2();
  return {-g2 * v.x - delta * v.y + 2.0 * h_y * v.z,
          -g2 * v.y + delta * v.x,
          g1 * (p.eta() - v.z) - 2.0 * h_y * v.x};
}

BlochState free_decay(const BlochState& initial, const DecoherenceParams& p, double t) {
  if (!(t >= 0.0)) throw DomainError("free_decay requires t >= 0");
  const double d2 = std::exp(-p.gamma_2() * t);
  const double d1 = std::exp(-p.gamma_1() * t);
  return {initial.x * d2, initial.y * d2, p.eta() + (initial.z - p.eta()) * d1};
}

DriveRates constant_drive_rates(const DecoherenceParams& p, double h_y) {
  if (!std::isfinite(h_y)) throw DomainError("drive amplitude must be finite");
  const double g1 = p.gamma_1();
  const double g2 = p.gamma_2();
  const double split = g1 - g2;
  const double drive = 4.0 * h_y;
  DriveRates out;
  if (g1 != g2) out.plus_rate_on_vz = g1 > g2;
  if (std::abs(split) > std::abs(drive)) {
    // (a - b)(a + b) keeps precision when the drive is small.
    const double root = std::sqrt((std::abs(split) - std::abs(drive)) * (std::abs(split) + std::abs(drive)));
    out.regime = DriveRegime::overdamped;
    out.rate_plus = 0.5 * (g1 + g2 + root);
    out.rate_minus = 0.5 * (g1 + g2 - root);
  } else {
    out.regime = DriveRegime::oscillatory;
    out.frequency = 0.5 * std::sqrt((std::abs(drive) - std::abs(split)) * (std::abs(drive) + std::abs(split)));
    out.decay = 0.5 * (g1 + g2);
  }
  return out;
}

BlochState steady_state(const DecoherenceParams& p, double h_y, double delta) {
  const double g1 = p.gamma_1();
  const double g2 = p.gamma_2();
  const double eta = p.eta();
  const double denom = 4.0 * h_y * h_y * g2 + g1 * (g2 * g2 + delta * delta);
  if (!(denom > 0.0)) throw DomainError("no unique steady state (vanishing relaxation and drive)");
  BlochState s;
  s.x = 2.0 * eta * h_y * g1 * g2 / denom;
  s.y = g2 > 0.0 ? (delta / g2) * s.x : 2.0 * eta * h_y * g1 * delta / denom;
  s.z = eta * g1 * (g2 * g2 + delta * delta) / denom;
  return s;
}

// ---------------------------------------------------------------------------
// ControlSchedule

ControlSchedule ControlSchedule::zero() { return ControlSchedule{}; }

ControlSchedule ControlSchedule::constant(double h_y, double h_max) {
  if (!(h_max > 0.0)) throw DomainError("h_max must be positive");
  if (std::abs(h_y) > h_max) throw DomainError("constant drive exceeds its amplitude cap");
  ControlSchedule s;
  s.kind_ = h_y == 0.0 ? Kind::zero : Kind::constant;
  s.value_ = h_y;
  s.h_max_ = h_max;
  return s;
}

ControlSchedule ControlSchedule::tracking(const TrackingLaw& law, double h_max, std::optional<double> cutoff_time) {
  if (!(h_max > 0.0)) throw DomainError("h_max must be positive");
  ControlSchedule s;
  s.kind_ = Kind::tracking;
  s.h_max_ = h_max;
  s.cutoff_ = cutoff_time;
  s.law_ = law;
  return s;
}

ControlSchedule ControlSchedule::from_function(std::function<double(double)> f, double h_max,
                                               std::optional<double> cutoff_time) {
  if (!f) throw DomainError("control function is empty");
  if (!(h_max > 0.0)) throw DomainError("h_max must be positive");
  ControlSchedule s;
  s.kind_ = Kind::function;
  s.fn_ = std::move(f);
  s.h_max_ = h_max;
  s.cutoff_ = cutoff_time;
  return s;
}

double ControlSchedule::direct(double t) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::constant:
      return value_;
    case Kind::function: {
      const double h = fn_(t);
      if (std::abs(h) > h_max_) throw DomainError("control exceeds h_max at t=" + std::to_string(t));
      return h;
    }
    case Kind::tracking:
      break;
  }
  throw std::logic_error("tracking schedules are evaluated through their reference");
}

double ControlSchedule::operator()(double t) const {
  const double times[] = {t};
  return sample(times).front();
}

std::vector<double> ControlSchedule::sample(std::span<const double> times) const {
  std::vector<double> out(times.size(), 0.0);
  if (kind_ != Kind::tracking) {
    for (std::size_t i = 0; i < times.size(); ++i)
      out[i] = (cutoff_ && times[i] >= *cutoff_) ? 0.0 : direct(times[i]);
    return out;
  }
  const TrackingLaw law = *law_;
  auto rhs = [&law](double, const ode::State<1>& z) { return ode::State<1>{law.reference_rate(z[0])}; };
  auto stepper = ode::make_stepper<1>(rhs, default_tolerance());
  double t = 0.0;
  ode::State<1> z{law.v_z0};
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double ti = times[i];
    if (ti < 0.0) throw DomainError("schedule sampled at negative time");
    if (cutoff_ && ti >= *cutoff_) continue;
    if (ti < t) throw DomainError("schedule sample times must be non-decreasing");
    z = stepper.advance(t, z, ti);
    t = ti;
    out[i] = law.amplitude(z[0]);
  }
  return out;
}

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (initial.y != 0.0) throw DomainError("initial state must have v_y = 0");
  if (initial.norm() > 1.0 + kNormSlack) throw DomainError("initial Bloch vector longer than 1");
  if (time_grid.empty() || time_grid.front() != 0.0) throw DomainError("time grid must start at 0");
  for (std::size_t i = 1; i < time_grid.size(); ++i)
    if (!(time_grid[i] > time_grid[i - 1])) throw DomainError("time grid must be strictly increasing");
  if (!std::isfinite(delta)) throw DomainError("detuning must be finite");
}

ode::Tolerance default_tolerance() { return ode::Tolerance{}; }

Trajectory integrate_trajectory(const ExperimentConfig& config, const DecoherenceParams& p,
                                const ControlSchedule& control, const ode::Tolerance& tol) {
  config.validate();
  const auto& law = control.tracking_law();
  const double cutoff = control.cutoff_time().value_or(std::numeric_limits<double>::infinity());
  const double delta = config.delta;
  bool driven = !control.is_zero();

  // Fourth slot carries the reference v_z of a tracking schedule (frozen otherwise).
  auto amplitude = [&](double t, double z_ref) {
    if (!driven) return 0.0;
    return law ? law->amplitude(z_ref) : control.direct(t);
  };
  auto rhs = [&](double t, const ode::State<4>& s) {
    const double h = amplitude(t, s[3]);
    const BlochState d = bloch_derivative({s[0], s[1], s[2]}, p, h, delta);
    const double dz_ref = (driven && law) ? law->reference_rate(s[3]) : 0.0;
    return ode::State<4>{d.x, d.y, d.z, dz_ref};
  };
  auto stepper = ode::make_stepper<4>(rhs, tol);

  ode::State<4> s{config.initial.x, config.initial.y, config.initial.z, law ? law->v_z0 : 1.0};
  double t = 0.0;
  if (cutoff <= 0.0) driven = false;

  Trajectory out;
  out.reserve(config.time_grid.size());
  for (double target : config.time_grid) {
    if (driven && cutoff < target) {
      s = stepper.advance(t, s, cutoff);
      t = cutoff;
      driven = false;
    }
    s = stepper.advance(t, s, target);
    t = target;
    const bool on = driven && target < cutoff;
    out.push_back({target, {s[0], s[1], s[2]}, on ? amplitude(target, s[3]) : 0.0});
  }
  return out;
}

}  // namespace qsense
