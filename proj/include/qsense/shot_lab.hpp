#pragma once

// Monte Carlo measurement shots and the detuning-sweep estimation pipeline.
//
// Randomness: std::mt19937_64 per record, seeded from the master seed and the
// record's cell index through splitmix64. Binomial draws use CDF inversion for
// N <= 1000 and a continuity-corrected normal approximation (Box-Muller) above,
// so records are reproducible across platforms; `exact` switches to
// std::binomial_distribution.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qsense/grid.hpp"
#include "qsense/protocols.hpp"
#include "qsense/sensitivity.hpp"
#include "qsense/stabilization.hpp"

namespace qsense {

inline constexpr const char* kRngDescription =
    "mt19937_64 per record; seed = splitmix64(master ^ splitmix64(cell)); binomial: inversion (N<=1000) "
    "or continuity-corrected normal via Box-Muller";

enum class ShotProtocol { ramsey, stabilized };

const char* to_string(ShotProtocol p);

struct ShotRecord {
  ShotProtocol protocol = ShotProtocol::ramsey;
  std::size_t iteration = 0;
  // Detuning in units of 1/T2_nominal.
  double delta = 0.0;
  // T2 of this iteration relative to nominal (1 without drift).
  double t2_scale = 1.0;
  // Measurement time in units of T2_nominal.
  double t_meas = 0.0;
  std::uint64_t shots = 0;
  std::uint64_t k_plus = 0;
  std::uint64_t seed = 0;

  // 2 k/N - 1.
  double estimate() const;
  bool operator==(const ShotRecord&) const = default;
};

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell);

// k_plus ~ Binomial(N, (1 + C v_y)/2).
ShotRecord sample_shots(double v_y, std::uint64_t shots, double contrast, std::uint64_t seed, bool exact = false);

struct SweepOptions {
  ShotPlan plan;  // plan.shots is the number of shots per record
  std::size_t iterations = 20;
  Mode mode = Mode::per_shot;
  double cap_over_gamma2 = kDefaultCapOverGamma2;
  // Largest |delta| T2 accepted (small-signal regime).
  double max_abs_delta = 0.05;
  // Per-iteration T2 drawn uniformly in [1 - drift, 1 + drift] x nominal.
  double t2_drift = 0.0;
  bool exact_sampling = false;
  Execution execution = Execution::parallel;
};

std::vector<double> default_detunings();

// For every iteration and detuning, one stabilized and one Ramsey record, in
// that interleaved order. Both protocols are simulated on the full dynamics
// at their optimal times; T1/T2 stays fixed when T2 drifts.
std::vector<ShotRecord> run_detuning_sweep(const InitialState& init, const DecoherenceParams& p,
                                           std::span<const double> deltas, const SweepOptions& opts,
                                           std::uint64_t seed);

struct RatioEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::vector<double> chunk_ratios;
};

// Chunk c takes iterations c, c + n, c + 2n, ...; each chunk fits zero-intercept
// slopes of v_y vs delta T2_iteration and forms stabilized/Ramsey. For
// per_root_time each slope is first divided by sqrt(t/T2).
RatioEstimate chunked_ratio_estimate(std::span<const ShotRecord> records, std::size_t n_chunks, Mode mode);

}  // namespace qsense
