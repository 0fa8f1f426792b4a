#pragma once

#include <limits>

#include "qsense/bloch.hpp"

namespace qsense {

// Pure state in the xz plane at polar angle theta in [0, pi/2].
class InitialState {
 public:
  static InitialState from_theta(double theta);
  static InitialState from_vx(double v_x0);

  double theta() const { return theta_; }
  double v_x0() const { return v_x0_; }
  double v_z0() const { return v_z0_; }
  BlochState bloch() const { return {v_x0_, 0.0, v_z0_}; }

 private:
  InitialState(double theta, double vx, double vz) : theta_(theta), v_x0_(vx), v_z0_(vz) {}
  double theta_;
  double v_x0_;
  double v_z0_;
};

// Default amplitude cap, in units of gamma_2.
inline constexpr double kDefaultCapOverGamma2 = 50.0;

// h_y = g2 v_x0 / (2 v_z). Throws SingularControlError at v_z = 0.
double control_field(double v_z, double v_x0, double gamma_2);

// Largest v_x0 that can be held forever: (eta/2) sqrt(g1/g2).
double stability_threshold(const DecoherenceParams& p);
bool is_stable(double v_x0, const DecoherenceParams& p);

struct BreakdownResult {
  double t_b = std::numeric_limits<double>::infinity();
  double tau_b = std::numeric_limits<double>::infinity();
  // sqrt(4 v_x0^2 g2/g1 - eta^2); 0 for stable states, +inf when g1 = 0.
  double alpha = 0.0;

  bool stable() const { return t_b == std::numeric_limits<double>::infinity(); }
};

// Time at which v_z of the stabilized (delta = 0) trajectory reaches zero.
BreakdownResult breakdown_time(const InitialState& init, const DecoherenceParams& p);

// Tracking schedule for `init` designed with `p`; the drive is cut to zero
// permanently the first time it would exceed h_max.
ControlSchedule build_schedule(const InitialState& init, const DecoherenceParams& p, double h_max);
ControlSchedule build_schedule(const InitialState& init, const DecoherenceParams& p);

}  // namespace qsense
