#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "qsense/bloch.hpp"
#include "qsense/grid.hpp"
#include "qsense/protocols.hpp"

namespace qsense {

struct ImprovementReport {
  Mode mode = Mode::per_shot;
  double ratio = 0.0;
  double best_v_x0 = 0.0;
  double best_theta = 0.0;
  double t_meas = 0.0;
  double t1_over_t2 = 1.0;
  double eta = 1.0;
  TimingBranch branch = TimingBranch::stable_vy;
  double t_b = std::numeric_limits<double>::infinity();
  // Same ratio re-measured on the full dynamics at detuning `ode_delta`; NaN if skipped.
  double ode_ratio = std::numeric_limits<double>::quiet_NaN();
  double ode_delta = 0.0;
};

// Shots N, total time T, inactive time per shot t_i, contrast C.
struct ShotPlan {
  std::uint64_t shots = 1;
  double total_time = 0.0;
  double inactive_time = 0.0;
  double contrast = 1.0;

  void validate() const;
  // T / (t + t_i): shots that fit in the budget at evolution time t.
  double shots_for(double t_evolution) const;
};

enum class InterceptPolicy { through_origin, fitted };

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  InterceptPolicy policy = InterceptPolicy::through_origin;
  double slope_std_error = 0.0;
  double residual_rms = 0.0;
  std::size_t points = 0;
};

// Least squares y = a x (+ b). Needs at least 3 points.
SlopeFit fit_slope(std::span<const double> x, std::span<const double> y,
                   InterceptPolicy policy = InterceptPolicy::through_origin);

// C N (v_y/2) / sqrt(N (1 - v_y^2)/4); ~ C sqrt(N) v_y for small v_y.
double snr(double v_y, double shots, double contrast);
double snr_small_signal(double v_y, double shots, double contrast);

enum class UncertaintyMode { per_root_shots, per_root_time };

// sqrt(N) dDelta = 1/(a C), or sqrt(T) dDelta = sqrt(t)/(a C).
// Angular units in, angular units out; divide by 2 pi for ordinary frequency.
double frequency_uncertainty(const SlopeFit& fit, const ShotPlan& plan, UncertaintyMode mode, double t_evolution);

// Improvement ratios at small detuning (independent of delta to first order).
double improvement_rv(double v_x0, const DecoherenceParams& p);
double improvement_rs(double v_x0, const DecoherenceParams& p);
double improvement_ratio(double v_x0, const DecoherenceParams& p, Mode mode);

struct OptimizeOptions {
  std::size_t scan_points = 200;
  double tolerance = 1e-6;
  bool confirm_with_ode = true;
  double ode_delta = 0.01;  // in units of 1/T2
  double cap_over_gamma2 = 50.0;
};

ImprovementReport optimize_initial_state(const DecoherenceParams& p, Mode mode, const OptimizeOptions& opts = {});

struct SimulationOptions {
  double delta = 0.01;  // in units of 1/T2 (of the design parameters)
  double cap_over_gamma2 = 50.0;
  double stable_horizon_over_t2 = kStableHorizonOverT2;
  Execution execution = Execution::parallel;
};

// Ratio of the stabilized protocol to Ramsey, both read off the full dynamics
// of `actual` at the times (and with the schedule) that are optimal for `design`.
double simulated_ratio(double v_x0, const DecoherenceParams& design, const DecoherenceParams& actual, Mode mode,
                       const SimulationOptions& opts = {});

// Rows: T1/T2 values; columns: v_x0 values. gamma_2 = 1 and the shared eta.
Matrix sweep_improvement(std::span<const double> t1_over_t2, std::span<const double> v_x0, Mode mode,
                         double eta = 1.0, const SimulationOptions& opts = {});

// Symmetric miscalibration axis (T_nominal/T_actual - 1) in [-range, range].
std::vector<double> miscalibration_axis(double range = 0.3, std::size_t points = 41);

struct MiscalibrationResult {
  // Rows: miscalibration of 1/T1; columns: miscalibration of 1/T2. NaN marks
  // cells with gamma_1 > 2 gamma_2 (no physical dephasing rate).
  Matrix ratios;
  ImprovementReport nominal;
};

MiscalibrationResult miscalibration_grid(const DecoherenceParams& nominal, std::span<const double> miscal_gamma_1,
                                         std::span<const double> miscal_gamma_2, Mode mode,
                                         const SimulationOptions& opts = {});

}  // namespace qsense
