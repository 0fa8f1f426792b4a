#include "qsense/sensitivity.hpp"

#include <cmath>
#include <numbers>

#include "qsense/errors.hpp"
#include "qsense/measurement.hpp"
#include "qsense/scalar_search.hpp"
#include "qsense/stabilization.hpp"

namespace qsense {

namespace {

// v_x0 this close to the stability threshold uses the stable-branch formulas.
constexpr double kThresholdStitch = 1e-6;

bool treat_as_stable(double v_x0, const DecoherenceParams& p) {
  return is_stable(v_x0, p) || (p.gamma_1() > 0.0 && v_x0 - stability_threshold(p) <= kThresholdStitch);
}

}  // namespace

void ShotPlan::validate() const {
  if (shots < 1 && !(total_time > 0.0)) throw DomainError("shot plan needs N >= 1 or T > 0");
  if (!(contrast > 0.0 && contrast <= 1.0)) throw DomainError("contrast must lie in (0, 1]");
  if (!(inactive_time >= 0.0)) throw DomainError("inactive time must be non-negative");
}

double ShotPlan::shots_for(double t_evolution) const {
  if (!(total_time > 0.0)) return static_cast<double>(shots);
  return total_time / (t_evolution + inactive_time);
}

SlopeFit fit_slope(std::span<const double> x, std::span<const double> y, InterceptPolicy policy) {
  if (x.size() != y.size()) throw FitError("slope fit: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw FitError("slope fit needs at least 3 points");
  SlopeFit fit;
  fit.policy = policy;
  fit.points = n;

  double sxx = 0.0, sxy = 0.0;
  std::size_t dof = n - 1;
  if (policy == InterceptPolicy::through_origin) {
    for (std::size_t i = 0; i < n; ++i) {
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    if (!(sxx > 0.0)) throw FitError("slope fit: all abscissae are zero");
    fit.slope = sxy / sxx;
  } else {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += x[i];
      my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      sxx += (x[i] - mx) * (x[i] - mx);
      sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw FitError("slope fit: abscissae have no spread");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    dof = n - 2;
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - fit.slope * x[i] - fit.intercept;
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / static_cast<double>(n));
  fit.slope_std_error = std::sqrt(ss / static_cast<double>(dof) / sxx);
  return fit;
}

double snr(double v_y, double shots, double contrast) {
  if (!(std::abs(v_y) < 1.0)) throw DomainError("snr requires |v_y| < 1");
  return contrast * shots * (0.5 * v_y) / std::sqrt(shots * (1.0 + v_y) * (1.0 - v_y) / 4.0);
}

double snr_small_signal(double v_y, double shots, double contrast) { return contrast * std::sqrt(shots) * v_y; }

double frequency_uncertainty(const SlopeFit& fit, const ShotPlan& plan, UncertaintyMode mode, double t_evolution) {
  plan.validate();
  if (!(fit.slope > 0.0)) throw FitError("frequency uncertainty needs a positive slope");
  const double per_shot = 1.0 / (fit.slope * plan.contrast);
  if (mode == UncertaintyMode::per_root_shots) return per_shot;
  if (!(t_evolution > 0.0)) throw DomainError("evolution time must be positive");
  return std::sqrt(t_evolution) * per_shot;
}

double improvement_rv(double v_x0, const DecoherenceParams& p) {
  if (treat_as_stable(v_x0, p)) return std::numbers::e * v_x0;
  const double tau_b = breakdown_time(InitialState::from_vx(v_x0), p).tau_b;
  return std::exp(1.0 - std::exp(-tau_b)) * v_x0;
}

double improvement_rs(double v_x0, const DecoherenceParams& p) {
  const double g2 = p.gamma_2();
  const double ramsey = 1.0 / std::sqrt(2.0 * std::numbers::e * g2);
  if (treat_as_stable(v_x0, p)) {
    const double t = stable_snr_time_over_t2() / g2;
    return stabilized_vy(t, v_x0, 1.0, g2) / std::sqrt(t) / ramsey;
  }
  const auto timing = optimal_time(v_x0, p, Mode::per_root_time);
  return protocol_vy(timing.t_meas, v_x0, p, 1.0) / std::sqrt(timing.t_meas) / ramsey;
}

double improvement_ratio(double v_x0, const DecoherenceParams& p, Mode mode) {
  return mode == Mode::per_shot ? improvement_rv(v_x0, p) : improvement_rs(v_x0, p);
}

ImprovementReport optimize_initial_state(const DecoherenceParams& p, Mode mode, const OptimizeOptions& opts) {
  auto objective = [&](double vx) { return improvement_ratio(vx, p, mode); };
  const ScalarMax best = bracket_and_refine(objective, 0.0, 1.0, opts.scan_points, opts.tolerance);

  ImprovementReport r;
  r.mode = mode;
  r.ratio = best.value;
  r.best_v_x0 = best.x;
  r.best_theta = std::asin(best.x);
  r.t1_over_t2 = p.t1_over_t2();
  r.eta = p.eta();
  const auto timing = optimal_time(best.x, p, mode);
  r.t_meas = timing.t_meas;
  r.branch = timing.branch;
  r.t_b = timing.t_b;
  if (opts.confirm_with_ode) {
    SimulationOptions sim;
    sim.delta = opts.ode_delta;
    sim.cap_over_gamma2 = opts.cap_over_gamma2;
    r.ode_ratio = simulated_ratio(best.x, p, p, mode, sim);
    r.ode_delta = opts.ode_delta;
  }
  return r;
}

namespace {

double ramsey_time(const DecoherenceParams& design, Mode mode) {
  return (mode == Mode::per_shot ? 1.0 : 0.5) / design.gamma_2();
}

double ratio_from_signals(double vy_c, double t_c, double vy_r, double t_r, Mode mode) {
  if (mode == Mode::per_shot) return vy_c / vy_r;
  return (vy_c / std::sqrt(t_c)) / (vy_r / std::sqrt(t_r));
}

}  // namespace

double simulated_ratio(double v_x0, const DecoherenceParams& design, const DecoherenceParams& actual, Mode mode,
                       const SimulationOptions& opts) {
  const double delta = opts.delta * design.gamma_2();
  const auto init = InitialState::from_vx(v_x0);
  const auto timing = optimal_time(v_x0, design, mode, opts.stable_horizon_over_t2);
  const double vy_c = simulate_stabilized_vy(init, design, actual, delta, timing.t_meas,
                                             opts.cap_over_gamma2 * design.gamma_2());
  const double t_r = ramsey_time(design, mode);
  const double vy_r = simulate_ramsey_vy(actual, delta, t_r);
  return ratio_from_signals(vy_c, timing.t_meas, vy_r, t_r, mode);
}

Matrix sweep_improvement(std::span<const double> t1_over_t2, std::span<const double> v_x0, Mode mode, double eta,
                         const SimulationOptions& opts) {
  if (t1_over_t2.empty() || v_x0.empty()) throw DomainError("sweep grids must be non-empty");
  std::vector<DecoherenceParams> rows;
  rows.reserve(t1_over_t2.size());
  for (double r : t1_over_t2) rows.push_back(DecoherenceParams::from_t1_over_t2(r, eta));
  for (double v : v_x0)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("v_x0 grid values must lie in [0, 1]");

  Matrix m;
  m.row_labels.assign(t1_over_t2.begin(), t1_over_t2.end());
  m.col_labels.assign(v_x0.begin(), v_x0.end());
  const std::size_t cols = v_x0.size();
  m.values = evaluate_cells(
      rows.size() * cols,
      [&](std::size_t k) {
        const auto& p = rows[k / cols];
        return simulated_ratio(v_x0[k % cols], p, p, mode, opts);
      },
      opts.execution);
  return m;
}

std::vector<double> miscalibration_axis(double range, std::size_t points) {
  if (!(range >= 0.0 && range < 1.0)) throw DomainError("miscalibration range must lie in [0, 1)");
  if (points < 1) throw DomainError("miscalibration axis needs at least one point");
  std::vector<double> axis(points, 0.0);
  if (points == 1) return axis;
  for (std::size_t i = 0; i < points; ++i)
    axis[i] = -range + 2.0 * range * static_cast<double>(i) / static_cast<double>(points - 1);
  if (points % 2 == 1) axis[points / 2] = 0.0;
  return axis;
}

MiscalibrationResult miscalibration_grid(const DecoherenceParams& nominal, std::span<const double> miscal_gamma_1,
                                         std::span<const double> miscal_gamma_2, Mode mode,
                                         const SimulationOptions& opts) {
  if (miscal_gamma_1.empty() || miscal_gamma_2.empty()) throw DomainError("miscalibration grids must be non-empty");
  for (double m : miscal_gamma_1)
    if (!(nominal.gamma_1() * (1.0 + m) > 0.0)) throw DomainError("actual gamma_1 must be positive");
  for (double m : miscal_gamma_2)
    if (!(nominal.gamma_2() * (1.0 + m) > 0.0)) throw DomainError("actual gamma_2 must be positive");

  MiscalibrationResult out;
  OptimizeOptions oo;
  oo.confirm_with_ode = false;
  out.nominal = optimize_initial_state(nominal, mode, oo);

  // Everything the experimenter controls is fixed by the nominal optimum.
  const auto init = InitialState::from_vx(out.nominal.best_v_x0);
  const auto timing = optimal_time(init.v_x0(), nominal, mode, opts.stable_horizon_over_t2);
  const auto schedule = build_schedule(init, nominal, opts.cap_over_gamma2 * nominal.gamma_2());
  const double delta = opts.delta * nominal.gamma_2();
  const double t_r = ramsey_time(nominal, mode);

  Matrix& m = out.ratios;
  m.row_labels.assign(miscal_gamma_1.begin(), miscal_gamma_1.end());
  m.col_labels.assign(miscal_gamma_2.begin(), miscal_gamma_2.end());
  const std::size_t cols = m.cols();
  m.values = evaluate_cells(
      m.rows() * cols,
      [&](std::size_t k) {
        const double g1 = nominal.gamma_1() * (1.0 + miscal_gamma_1[k / cols]);
        const double g2 = nominal.gamma_2() * (1.0 + miscal_gamma_2[k % cols]);
        if (g1 > 2.0 * g2) return std::numeric_limits<double>::quiet_NaN();
        const auto actual = DecoherenceParams::from_rates(g1, g2, nominal.eta());
        const double vy_c = simulate_scheduled_vy(init, actual, delta, timing.t_meas, schedule);
        const double vy_r = simulate_ramsey_vy(actual, delta, t_r);
        return ratio_from_signals(vy_c, timing.t_meas, vy_r, t_r, mode);
      },
      opts.execution);
  return out;
}

}  // namespace qsense
