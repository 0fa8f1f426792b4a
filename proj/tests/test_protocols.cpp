#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracle.hpp"
#include "qsense/errors.hpp"
#include "qsense/protocols.hpp"
#include "qsense/stabilization.hpp"

using namespace qsense;

TEST_CASE("Ramsey optima") {
  const auto shot = ramsey_optimum(1e-6, 1.0, Mode::per_shot);
  CHECK(shot.timing.t_meas == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(shot.value / 1e-6 == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));

  const auto root = ramsey_optimum(1e-6, 1.0, Mode::per_root_time);
  CHECK(root.timing.t_meas == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(root.value / 1e-6 == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::e)).epsilon(1e-9));

  // Exact in delta: the stationary point moves at large detuning.
  const auto big = ramsey_optimum(2.0, 1.0, Mode::per_shot);
  CHECK(big.timing.t_meas == doctest::Approx(std::atan(2.0) / 2.0));
  const auto big_root = ramsey_optimum(2.0, 1.0, Mode::per_root_time);
  const double t = big_root.timing.t_meas, h = 1e-6;
  auto f = [](double s) { return ramsey_vy(2.0, 1.0, s) / std::sqrt(s); };
  CHECK(std::abs(f(t + h) - f(t - h)) / (2 * h) < 1e-6);
}

TEST_CASE("stable per-root-time optimum") {
  const double t = stable_snr_time_over_t2();
  CHECK(t == doctest::Approx(1.2564).epsilon(1e-4));
  // Stationarity of (1 - e^{-t}) / sqrt(t): 2 t e^{-t} = 1 - e^{-t}.
  CHECK(2.0 * t * std::exp(-t) == doctest::Approx(1.0 - std::exp(-t)).epsilon(1e-12));
}

TEST_CASE("signal is continuous across breakdown") {
  for (double tau : {0.01, 0.3, 1.0, 4.0})
    for (double vx0 : {0.4, 0.9})
      CHECK(post_breakdown_vy(0.0, vx0, tau, 0.01, 1.0) == stabilized_vy(tau, vx0, 0.01, 1.0));
}

TEST_CASE("optimal times are stationary points") {
  for (double g1 : {0.1, 0.5, 1.0, 2.0}) {
    const auto p = DecoherenceParams::from_rates(g1, 1.0);
    for (double vx0 = 0.02; vx0 < 1.0; vx0 += 0.02) {
      for (Mode mode : {Mode::per_shot, Mode::per_root_time}) {
        const auto timing = optimal_time(vx0, p, mode);
        const bool interior = timing.branch == TimingBranch::breakdown_vy ||
                              timing.branch == TimingBranch::breakdown_snr ||
                              (timing.branch == TimingBranch::stable_snr && timing.t_meas < timing.t_b);
        if (!interior) continue;
        auto objective = [&](double t) {
          const double vy = protocol_vy(t, vx0, p, 1.0);
          return mode == Mode::per_shot ? vy : vy / std::sqrt(t);
        };
        const double h = 1e-5, t = timing.t_meas;
        // Stationary points right at t_b would straddle the kink.
        if (std::abs(t - timing.t_b) < 2 * h) continue;
        CAPTURE(g1);
        CAPTURE(vx0);
        CHECK(std::abs(objective(t + h) - objective(t - h)) / (2 * h) < 1e-6);
      }
    }
  }
}

TEST_CASE("closed-form signals agree with the ODE oracle at small detuning") {
  const double delta = 0.01;
  const double budget = 2.0 * delta * delta;
  for (double g1 : {0.1, 0.5, 1.0, 2.0}) {
    const auto p = DecoherenceParams::from_rates(g1, 1.0);
    const oracle::Rates r{g1, 1.0, 1.0};
    for (int i = 1; i <= 50; ++i) {
      const double vx0 = 0.99 * i / 50.0;
      const auto bd = breakdown_time(InitialState::from_vx(vx0), p);
      for (Mode mode : {Mode::per_shot, Mode::per_root_time}) {
        const double t = optimal_time(vx0, p, mode).t_meas;
        CAPTURE(g1);
        CAPTURE(vx0);
        CAPTURE(t);
        CHECK(std::abs(protocol_vy(t, vx0, p, delta) - oracle::stabilized_vy(vx0, r, delta, t)) <= budget);
      }
      if (!bd.stable()) {
        const double t = 0.5 * bd.t_b;
        CHECK(std::abs(protocol_vy(t, vx0, p, delta) - oracle::stabilized_vy(vx0, r, delta, t)) <= budget);
      }
    }
    const auto ram = ramsey_optimum(delta, 1.0, Mode::per_shot);
    CHECK(std::abs(ram.value - oracle::ramsey_vy(r, delta, ram.timing.t_meas)) <= 1e-9);
  }
}

TEST_CASE("equatorial start reduces to Ramsey") {
  const auto p = DecoherenceParams::from_rates(0.7, 1.0);
  const auto bd = breakdown_time(InitialState::from_vx(1.0), p);
  CHECK(bd.t_b == doctest::Approx(0.0).epsilon(1e-12));
  for (double t : {0.2, 1.0, 3.0})
    CHECK(protocol_vy(t, 1.0, p, 1e-3) == doctest::Approx(1e-3 * t * std::exp(-t)).epsilon(1e-9));
  CHECK(optimal_time(1.0, p, Mode::per_shot).t_meas == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(optimal_time(1.0, p, Mode::per_root_time).t_meas == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(post_breakdown_snr_offset(0.0) == doctest::Approx(0.5));
}

TEST_CASE("post-breakdown offset is the stationary point of v_y / sqrt(t)") {
  for (double tau : {0.05, 0.5, 2.0, 10.0, 50.0, 500.0}) {
    const double off = post_breakdown_snr_offset(tau);
    REQUIRE(std::isfinite(off));
    REQUIRE(tau + off > 0.0);
    auto f = [&](double tp) { return (-std::expm1(-tau) + tp) * std::exp(-tp) / std::sqrt(tau + tp); };
    const double h = 1e-6 * std::max(1.0, std::abs(off));
    CAPTURE(tau);
    CHECK(std::abs(f(off + h) - f(off - h)) / (2 * h) < 1e-8);
  }
  // Long breakdown times push the stationary point just before t_b.
  CHECK(post_breakdown_snr_offset(500.0) == doctest::Approx(-1.0 / 1000.0).epsilon(1e-2));
  CHECK_THROWS_AS(post_breakdown_snr_offset(-1.0), DomainError);
}

TEST_CASE("stable states use the configured horizon") {
  const auto p = DecoherenceParams::from_rates(1.0, 1.0);
  const auto t = optimal_time(0.3, p, Mode::per_shot);
  CHECK(t.branch == TimingBranch::stable_vy);
  CHECK(t.asymptotic);
  CHECK(t.t_meas == kStableHorizonOverT2);
  CHECK(optimal_time(0.3, p, Mode::per_shot, 8.0).t_meas == 8.0);
}
