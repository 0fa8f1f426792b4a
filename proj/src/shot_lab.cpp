#include "qsense/shot_lab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "qsense/errors.hpp"
#include "qsense/measurement.hpp"

namespace qsense {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t binomial_inversion(std::uint64_t n, double p, std::mt19937_64& rng) {
  const bool flip = p > 0.5;
  const double q = flip ? 1.0 - p : p;
  const double u = uniform01(rng);
  double pmf = std::pow(1.0 - q, static_cast<double>(n));
  double cdf = pmf;
  std::uint64_t k = 0;
  const double odds = q / (1.0 - q);
  while (u >= cdf && k < n) {
    pmf *= odds * static_cast<double>(n - k) / static_cast<double>(k + 1);
    ++k;
    cdf += pmf;
  }
  return flip ? n - k : k;
}

std::uint64_t binomial_normal(std::uint64_t n, double p, std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  const double nd = static_cast<double>(n);
  const double k = std::floor(nd * p + std::sqrt(nd * p * (1.0 - p)) * z + 0.5);
  return static_cast<std::uint64_t>(std::clamp(k, 0.0, nd));
}

}  // namespace

const char* to_string(ShotProtocol p) { return p == ShotProtocol::ramsey ? "ramsey" : "stabilized"; }

double ShotRecord::estimate() const {
  return 2.0 * static_cast<double>(k_plus) / static_cast<double>(shots) - 1.0;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell) { return splitmix64(master ^ splitmix64(cell)); }

ShotRecord sample_shots(double v_y, std::uint64_t shots, double contrast, std::uint64_t seed, bool exact) {
  if (!(std::abs(v_y) <= 1.0)) throw DomainError("sample_shots requires |v_y| <= 1");
  if (!(contrast > 0.0 && contrast <= 1.0)) throw DomainError("contrast must lie in (0, 1]");
  if (shots == 0) throw DomainError("sample_shots requires at least one shot");
  const double p = std::clamp(0.5 * (1.0 + contrast * v_y), 0.0, 1.0);
  std::mt19937_64 rng(seed);
  ShotRecord r;
  r.shots = shots;
  r.seed = seed;
  if (p == 0.0 || p == 1.0) {
    r.k_plus = p == 1.0 ? shots : 0;
  } else if (exact) {
    r.k_plus = std::binomial_distribution<std::uint64_t>(shots, p)(rng);
  } else if (shots <= 1000) {
    r.k_plus = binomial_inversion(shots, p, rng);
  } else {
    r.k_plus = binomial_normal(shots, p, rng);
  }
  return r;
}

std::vector<double> default_detunings() { return {-0.02, -0.01, 0.0, 0.01, 0.02}; }

std::vector<ShotRecord> run_detuning_sweep(const InitialState& init, const DecoherenceParams& p,
                                           std::span<const double> deltas, const SweepOptions& opts,
                                           std::uint64_t seed) {
  opts.plan.validate();
  if (deltas.empty()) throw DomainError("detuning sweep needs at least one detuning");
  if (opts.iterations == 0) throw DomainError("detuning sweep needs at least one iteration");
  for (double d : deltas)
    if (!(std::abs(d) <= opts.max_abs_delta)) throw DomainError("detuning outside the small-signal range");
  if (!(opts.t2_drift >= 0.0 && opts.t2_drift < 1.0)) throw DomainError("T2 drift must lie in [0, 1)");

  const double g2 = p.gamma_2();
  const std::size_t n_delta = deltas.size();
  std::vector<double> t2_scale(opts.iterations, 1.0);
  if (opts.t2_drift > 0.0) {
    std::mt19937_64 drift_rng(derive_seed(seed, 0xD21F7ULL));
    for (auto& f : t2_scale) f = 1.0 + opts.t2_drift * (2.0 * uniform01(drift_rng) - 1.0);
  }

  struct IterationSetup {
    DecoherenceParams params;
    ProtocolTiming timing;
    double t_ramsey;
  };
  std::vector<IterationSetup> setups;
  setups.reserve(opts.iterations);
  for (double f : t2_scale) {
    // T1 and T2 drift together; the experimenter re-measures both each iteration.
    const auto pi = DecoherenceParams::from_rates(p.gamma_1() / f, g2 / f, p.eta());
    setups.push_back({pi, optimal_time(init.v_x0(), pi, opts.mode),
                      (opts.mode == Mode::per_shot ? 1.0 : 0.5) / pi.gamma_2()});
  }

  // Without drift every iteration sees the same noiseless signals.
  const std::size_t distinct = opts.t2_drift > 0.0 ? opts.iterations : 1;
  const std::vector<double> signals = evaluate_cells(
      distinct * n_delta * 2,
      [&](std::size_t k) {
        const auto& s = setups[k / (2 * n_delta)];
        const double delta = deltas[(k / 2) % n_delta] * g2;
        if (k % 2 == 0)
          return simulate_stabilized_vy(init, s.params, s.params, delta, s.timing.t_meas,
                                        opts.cap_over_gamma2 * s.params.gamma_2());
        return simulate_ramsey_vy(s.params, delta, s.t_ramsey);
      },
      opts.execution);

  std::vector<ShotRecord> records;
  records.reserve(opts.iterations * n_delta * 2);
  for (std::size_t i = 0; i < opts.iterations; ++i) {
    const std::size_t si = distinct == 1 ? 0 : i;
    for (std::size_t j = 0; j < n_delta; ++j) {
      for (std::size_t k = 0; k < 2; ++k) {
        const std::uint64_t cell = (i * n_delta + j) * 2 + k;
        ShotRecord r = sample_shots(signals[(si * n_delta + j) * 2 + k], opts.plan.shots, opts.plan.contrast,
                                    derive_seed(seed, cell), opts.exact_sampling);
        r.protocol = k == 0 ? ShotProtocol::stabilized : ShotProtocol::ramsey;
        r.iteration = i;
        r.delta = deltas[j];
        r.t2_scale = t2_scale[i];
        r.t_meas = (k == 0 ? setups[i].timing.t_meas : setups[i].t_ramsey) * g2;
        records.push_back(r);
      }
    }
  }
  return records;
}

RatioEstimate chunked_ratio_estimate(std::span<const ShotRecord> records, std::size_t n_chunks, Mode mode) {
  if (n_chunks == 0) throw DomainError("need at least one chunk");
  std::set<std::size_t> iteration_ids;
  for (const auto& r : records) iteration_ids.insert(r.iteration);
  if (iteration_ids.size() < 2 * n_chunks)
    throw DomainError("chunked estimate needs at least two iterations per chunk");
  std::map<std::size_t, std::size_t> chunk_of;
  std::size_t pos = 0;
  for (std::size_t id : iteration_ids) chunk_of[id] = pos++ % n_chunks;

  RatioEstimate est;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    double slope[2] = {0.0, 0.0};
    for (int proto = 0; proto < 2; ++proto) {
      const auto tag = proto == 0 ? ShotProtocol::stabilized : ShotProtocol::ramsey;
      std::vector<double> x, y;
      std::set<double> distinct_deltas;
      double time_ratio = 0.0;
      for (const auto& r : records) {
        if (r.protocol != tag || chunk_of[r.iteration] != c) continue;
        x.push_back(r.delta * r.t2_scale);
        y.push_back(r.estimate());
        distinct_deltas.insert(r.delta);
        time_ratio += r.t_meas / r.t2_scale;
      }
      if (distinct_deltas.size() < 3) throw FitError("chunk has fewer than 3 detunings");
      slope[proto] = fit_slope(x, y).slope;
      if (mode == Mode::per_root_time) slope[proto] /= std::sqrt(time_ratio / static_cast<double>(x.size()));
    }
    if (slope[1] == 0.0) throw FitError("Ramsey slope vanished in a chunk");
    est.chunk_ratios.push_back(slope[0] / slope[1]);
  }

  const double n = static_cast<double>(n_chunks);
  double sum = 0.0;
  for (double r : est.chunk_ratios) sum += r;
  est.mean = sum / n;
  if (n_chunks > 1) {
    double ss = 0.0;
    for (double r : est.chunk_ratios) ss += (r - est.mean) * (r - est.mean);
    est.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return est;
}

}  // namespace qsense
