#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracle.hpp"
#include "qsense/errors.hpp"
#include "qsense/stabilization.hpp"

using namespace qsense;

namespace {

oracle::Rates rates_of(const DecoherenceParams& p) { return {p.gamma_1(), p.gamma_2(), p.eta()}; }

// Largest |v_x - v_x0| over `n` grid points in [0, t_end].
double max_vx_drift(const InitialState& init, const DecoherenceParams& p, double delta, double t_end, double h_max,
                    std::size_t n = 200) {
  ExperimentConfig cfg{delta, init.bloch(), {}};
  for (std::size_t i = 0; i < n; ++i) cfg.time_grid.push_back(t_end * static_cast<double>(i) / (n - 1));
  double worst = 0.0;
  for (const auto& pt : integrate_trajectory(cfg, p, build_schedule(init, p, h_max)))
    worst = std::max(worst, std::abs(pt.v.x - init.v_x0()));
  return worst;
}

}  // namespace

TEST_CASE("initial state parametrisations agree") {
  const auto a = InitialState::from_theta(0.3);
  const auto b = InitialState::from_vx(std::sin(0.3));
  CHECK(a.v_x0() == doctest::Approx(b.v_x0()));
  CHECK(a.v_z0() == doctest::Approx(b.v_z0()));
  CHECK(b.theta() == doctest::Approx(0.3));
  CHECK_THROWS_AS(InitialState::from_vx(1.2), DomainError);
}

TEST_CASE("control field") {
  CHECK(control_field(0.5, 0.6, 1.0) == doctest::Approx(0.6));
  CHECK_THROWS_AS(control_field(0.0, 0.6, 1.0), SingularControlError);
}

TEST_CASE("stability threshold is inclusive") {
  const auto p = DecoherenceParams::from_rates(0.25, 1.0);
  CHECK(stability_threshold(p) == doctest::Approx(0.25));
  CHECK(is_stable(0.25, p));
  CHECK_FALSE(is_stable(0.2500001, p));
  CHECK(breakdown_time(InitialState::from_vx(stability_threshold(p)), p).stable());
}

TEST_CASE("breakdown time matches the feedback zero crossing") {
  for (double g1 : {0.1, 0.4, 1.0, 2.0}) {
    const auto p = DecoherenceParams::from_rates(g1, 1.0);
    const double th = stability_threshold(p);
    for (double f : {0.1, 0.5, 0.9}) {
      const double vx0 = th + f * (0.99 - th);
      const auto bd = breakdown_time(InitialState::from_vx(vx0), p);
      REQUIRE_FALSE(bd.stable());
      CHECK(std::abs(bd.t_b - oracle::feedback_crossing(vx0, rates_of(p))) < 1e-6);
    }
  }
}

TEST_CASE("vanishing relaxation uses the finite limit") {
  const auto init = InitialState::from_vx(0.6);
  const double limit = 0.64 / (2.0 * 0.36);
  CHECK(breakdown_time(init, DecoherenceParams::from_rates(0.0, 1.0)).t_b == doctest::Approx(limit));
  CHECK(breakdown_time(init, DecoherenceParams::from_rates(1e-9, 1.0)).t_b == doctest::Approx(limit));
  const double near = breakdown_time(init, DecoherenceParams::from_rates(1e-6, 1.0)).t_b;
  CHECK(std::abs(near - oracle::feedback_crossing(0.6, {1e-6, 1.0, 1.0})) < 1e-6);
  CHECK(std::abs(near - limit) < 1e-5);
}

TEST_CASE("stability classification agrees with the feedback dynamics") {
  for (double g1 : {0.1, 0.5, 1.0, 2.0}) {
    const auto p = DecoherenceParams::from_rates(g1, 1.0);
    for (double vx0 = 0.05; vx0 < 1.0; vx0 += 0.1) {
      const auto init = InitialState::from_vx(vx0);
      if (is_stable(vx0, p)) {
        CHECK(oracle::feedback_min_vz(vx0, rates_of(p), 50.0) > 0.0);
      } else {
        CHECK(std::isfinite(breakdown_time(init, p).t_b));
      }
    }
  }
}

TEST_CASE("stabilization holds v_x until breakdown") {
  const auto p = DecoherenceParams::from_rates(1.0, 1.0);
  SUBCASE("unstable") {
    const auto init = InitialState::from_vx(0.8);
    const double t_b = breakdown_time(init, p).t_b;
    CHECK(max_vx_drift(init, p, 0.0, 0.999 * t_b, 1e4) <= 1e-6);
  }
  SUBCASE("stable") {
    const auto init = InitialState::from_vx(0.4);
    CHECK(max_vx_drift(init, p, 0.0, 20.0, 1e4) <= 1e-6);
  }
}

TEST_CASE("detuning perturbs v_x only at second order") {
  const auto p = DecoherenceParams::from_rates(0.5, 1.0);
  const auto init = InitialState::from_vx(0.7);
  const double t_end = 0.9 * breakdown_time(init, p).t_b;
  const double big = max_vx_drift(init, p, 1e-2, t_end, 1e4);
  const double small = max_vx_drift(init, p, 1e-3, t_end, 1e4);
  CHECK(big / small == doctest::Approx(100.0).epsilon(0.1));
}

TEST_CASE("cutoff follows breakdown closely at the default cap") {
  for (double g1 : {0.2, 1.0, 2.0}) {
    const auto p = DecoherenceParams::from_rates(g1, 1.0);
    for (double vx0 : {0.75, 0.9, 0.99}) {
      const auto init = InitialState::from_vx(vx0);
      const auto bd = breakdown_time(init, p);
      const auto s = build_schedule(init, p);
      REQUIRE(s.cutoff_time().has_value());
      CHECK(*s.cutoff_time() <= bd.t_b);
      CHECK(bd.t_b - *s.cutoff_time() < 1e-3);
      const double z_cut = vx0 / (2.0 * kDefaultCapOverGamma2);
      CHECK(std::abs(*s.cutoff_time() - oracle::feedback_crossing(vx0, rates_of(p), z_cut * z_cut)) < 1e-8);
    }
  }
}

TEST_CASE("schedule edge cases") {
  const auto p = DecoherenceParams::from_rates(1.0, 1.0);
  CHECK(build_schedule(InitialState::from_vx(0.0), p).is_zero());
  const auto equator = build_schedule(InitialState::from_vx(1.0), p);
  REQUIRE(equator.cutoff_time().has_value());
  CHECK(*equator.cutoff_time() == 0.0);
  CHECK_FALSE(build_schedule(InitialState::from_vx(0.3), p).cutoff_time().has_value());

  const auto s = build_schedule(InitialState::from_vx(0.8), p);
  const std::vector<double> times{0.0, 0.1, 0.5, 10.0};
  const auto h = s.sample(times);
  CHECK(h[0] == doctest::Approx(0.8 / (2.0 * 0.6)));
  CHECK(h[1] == doctest::Approx(s(0.1)));
  CHECK(h[3] == 0.0);
  for (double v : h) CHECK(v <= s.h_max());
}
