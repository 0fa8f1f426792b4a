#pragma once

// Signals read off the full Bloch dynamics (no small-detuning expansion).

#include "qsense/bloch.hpp"
#include "qsense/stabilization.hpp"

namespace qsense {

// v_y(t) of a Ramsey sequence: v(0) = (1, 0, 0), no drive.
double simulate_ramsey_vy(const DecoherenceParams& actual, double delta, double t);

// v_y(t) when the schedule designed for `design` drives a qubit whose real
// rates are `actual`. Pass the same params twice for a calibrated run.
double simulate_stabilized_vy(const InitialState& init, const DecoherenceParams& design,
                              const DecoherenceParams& actual, double delta, double t, double h_max);

// Same, with a prebuilt schedule.
double simulate_scheduled_vy(const InitialState& init, const DecoherenceParams& actual, double delta, double t,
                             const ControlSchedule& schedule);

}  // namespace qsense
