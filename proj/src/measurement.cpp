#include "qsense/measurement.hpp"

#include "qsense/errors.hpp"

namespace qsense {

double simulate_ramsey_vy(const DecoherenceParams& actual, double delta, double t) {
  if (!(t > 0.0)) throw DomainError("measurement time must be positive");
  const ExperimentConfig cfg{delta, {1.0, 0.0, 0.0}, {0.0, t}};
  return integrate_trajectory(cfg, actual, ControlSchedule::zero()).back().v.y;
}

double simulate_stabilized_vy(const InitialState& init, const DecoherenceParams& design,
                              const DecoherenceParams& actual, double delta, double t, double h_max) {
  return simulate_scheduled_vy(init, actual, delta, t, build_schedule(init, design, h_max));
}

double simulate_scheduled_vy(const InitialState& init, const DecoherenceParams& actual, double delta, double t,
                             const ControlSchedule& schedule) {
  if (!(t > 0.0)) throw DomainError("measurement time must be positive");
  const ExperimentConfig cfg{delta, init.bloch(), {0.0, t}};
  return integrate_trajectory(cfg, actual, schedule).back().v.y;
}

}  // namespace qsense
