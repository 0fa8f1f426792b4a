#pragma once

// Bloch-vector dynamics of a driven, detuned qubit under relaxation and
// dephasing:
//
//   dv_x/dt = -g2 v_x - D v_y + 2 h v_z
//   dv_y/dt = -g2 v_y + D v_x
//   dv_z/dt =  g1 (eta - v_z) - 2 h v_x
//
// Everything is expressed in whatever time unit the caller picks; the rest of
// the library works in units of T2 (g2 = 1).

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "qsense/ode.hpp"

namespace qsense {

inline constexpr double kNormSlack = 1e-9;

struct BlochState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
  bool operator==(const BlochState&) const = default;
};

class DecoherenceParams {
 public:
  // Any two of gamma_1, gamma_2, gamma_phi fix the third (g2 = g_phi + g1/2).
  static DecoherenceParams from_rates(double gamma_1, double gamma_2, double eta = 1.0);
  static DecoherenceParams from_dephasing(double gamma_1, double gamma_phi, double eta = 1.0);
  static DecoherenceParams from_times(double t1, double t2, double eta = 1.0);
  // gamma_2 = 1 (time measured in T2).
  static DecoherenceParams from_t1_over_t2(double t1_over_t2, double eta = 1.0);

  double gamma_1() const { return gamma_1_; }
  double gamma_2() const { return gamma_2_; }
  double gamma_phi() const { return gamma_phi_; }
  double eta() const { return eta_; }
  // +inf when gamma_1 = 0.
  double t1_over_t2() const;

  DecoherenceParams with_eta(double eta) const { return from_rates(gamma_1_, gamma_2_, eta); }

 private:
  DecoherenceParams(double g1, double g2, double gphi, double eta)
      : gamma_1_(g1), gamma_2_(g2), gamma_phi_(gphi), eta_(eta) {}

  double gamma_1_;
  double gamma_2_;
  double gamma_phi_;
  double eta_;
};

// Thermal asymmetry (1 - e^{-b w}) / (1 + e^{-b w}); 1 at zero temperature.
double eta_from_temperature(double beta, double omega01);

BlochState bloch_derivative(const BlochState& v, const DecoherenceParams& p, double h_y, double delta);

// Closed form for h_y = 0, delta = 0.
BlochState free_decay(const BlochState& initial, const DecoherenceParams& p, double t);

enum class DriveRegime { overdamped, oscillatory };

// Relaxation structure of the (v_x, v_z) block under a constant drive.
struct DriveRates {
  DriveRegime regime = DriveRegime::overdamped;
  // overdamped: the two decay rates, rate_plus >= rate_minus.
  double rate_plus = 0.0;
  double rate_minus = 0.0;
  // oscillatory: v_x and v_z ring at `frequency` under a common envelope `decay`.
  double frequency = 0.0;
  double decay = 0.0;
  // At h_y = 0 the plus rate belongs to v_z iff gamma_1 > gamma_2. Empty when
  // gamma_1 == gamma_2 (degenerate, no attachment).
  std::optional<bool> plus_rate_on_vz;
};

DriveRates constant_drive_rates(const DecoherenceParams& p, double h_y);

// Fixed point of the equations for constant h_y and delta.
BlochState steady_state(const DecoherenceParams& p, double h_y, double delta);

// Drive that tracks v_x = v_x0 along the delta = 0 reference:
//   h_y = g2 v_x0 / (2 z_ref),   dz_ref/dt = g1 (eta - z_ref) - g2 v_x0^2 / z_ref.
struct TrackingLaw {
  double v_x0 = 0.0;
  double v_z0 = 1.0;
  double gamma_1 = 0.0;
  double gamma_2 = 1.0;
  double eta = 1.0;

  double amplitude(double z_ref) const { return gamma_2 * v_x0 / (2.0 * z_ref); }
  double reference_rate(double z_ref) const {
    return gamma_1 * (eta - z_ref) - gamma_2 * v_x0 * v_x0 / z_ref;
  }
};

// Time-dependent drive amplitude h_y(t) with an amplitude cap and optional
// permanent cutoff.
class ControlSchedule {
 public:
  static ControlSchedule zero();
  static ControlSchedule constant(double h_y, double h_max = kUncapped);
  static ControlSchedule tracking(const TrackingLaw& law, double h_max, std::optional<double> cutoff_time);
  // `f` is checked against h_max whenever it is evaluated.
  static ControlSchedule from_function(std::function<double(double)> f, double h_max = kUncapped,
                                       std::optional<double> cutoff_time = std::nullopt);

  // Single-point evaluation. For tracking schedules this integrates the
  // reference from t = 0; prefer sample() for many points.
  double operator()(double t) const;
  std::vector<double> sample(std::span<const double> times) const;

  double h_max() const { return h_max_; }
  std::optional<double> cutoff_time() const { return cutoff_; }
  const std::optional<TrackingLaw>& tracking_law() const { return law_; }
  bool is_zero() const { return kind_ == Kind::zero; }
  // Amplitude of a non-tracking schedule ignoring the cutoff; cheap.
  double direct(double t) const;

  static constexpr double kUncapped = std::numeric_limits<double>::infinity();

 private:
  enum class Kind { zero, constant, tracking, function };
  Kind kind_ = Kind::zero;
  double value_ = 0.0;
  double h_max_ = kUncapped;
  std::optional<double> cutoff_;
  std::optional<TrackingLaw> law_;
  std::function<double(double)> fn_;
};

struct ExperimentConfig {
  double delta = 0.0;
  BlochState initial;
  std::vector<double> time_grid;

  // Throws DomainError unless v_y(0) = 0 and the grid is strictly increasing from 0.
  void validate() const;
};

struct TrajectoryPoint {
  double t = 0.0;
  BlochState v;
  double h_y = 0.0;
};

using Trajectory = std::vector<TrajectoryPoint>;

ode::Tolerance default_tolerance();

Trajectory integrate_trajectory(const ExperimentConfig& config, const DecoherenceParams& p,
                                const ControlSchedule& control, const ode::Tolerance& tol = default_tolerance());

}  // namespace qsense
