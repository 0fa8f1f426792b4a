#pragma once

// Closed-form signals and measurement times for Ramsey free evolution and the
// coherence-stabilized protocol. Ramsey expressions are exact in the
// detuning; the stabilized ones are first order in delta/gamma_2.

#include <limits>

#include "qsense/bloch.hpp"

namespace qsense {

enum class Mode { per_shot, per_root_time };

enum class TimingBranch { ramsey_vy, ramsey_snr, stable_vy, stable_snr, breakdown_vy, breakdown_snr };

const char* to_string(Mode m);
const char* to_string(TimingBranch b);

struct ProtocolTiming {
  double t_meas = 0.0;
  TimingBranch branch = TimingBranch::ramsey_vy;
  // The true optimum is at t -> infinity; t_meas is the finite horizon used instead.
  bool asymptotic = false;
  double t_b = std::numeric_limits<double>::infinity();
};

// Measurement horizon for permanently stable states, in units of T2.
inline constexpr double kStableHorizonOverT2 = 5.0;

// sin(delta t) e^{-g2 t}. Exact.
double ramsey_vy(double delta, double gamma_2, double t);

struct RamseyOptimum {
  ProtocolTiming timing;
  // v_y at t_meas for per_shot; v_y / sqrt(t_meas) for per_root_time.
  double value = 0.0;
};

// Exact maximizer of v_y (per_shot) or v_y/sqrt(t) (per_root_time).
RamseyOptimum ramsey_optimum(double delta, double gamma_2, Mode mode);

// (1 - e^{-g2 t}) v_x0 delta / g2: v_y while v_x is held at v_x0.
double stabilized_vy(double t, double v_x0, double delta, double gamma_2);

// Free decay after the drive is cut at breakdown, t_prime after t_b:
//   [v_y(t_b) + v_x0 delta t'] e^{-g2 t'},  v_y(t_b) = (1 - e^{-tau_b}) v_x0 delta / g2.
double post_breakdown_vy(double t_prime, double v_x0, double tau_b, double delta, double gamma_2);

// First-order v_y of the stabilized protocol at time t (either side of breakdown).
double protocol_vy(double t, double v_x0, const DecoherenceParams& p, double delta);

// -(1 + 2 W_{-1}(-1/(2 sqrt e))) / 2 ~= 1.2564: where (1 - e^{-s})/sqrt(s) peaks.
double stable_snr_time_over_t2();

// Time after breakdown maximizing v_y/sqrt(t), in units of T2. Negative when
// the post-breakdown objective already decreases at t_b.
double post_breakdown_snr_offset(double tau_b);

// Measurement time maximizing v_y (per_shot) or v_y/sqrt(t) (per_root_time).
ProtocolTiming optimal_time(double v_x0, const DecoherenceParams& p, Mode mode,
                            double stable_horizon_over_t2 = kStableHorizonOverT2);

}  // namespace qsense
