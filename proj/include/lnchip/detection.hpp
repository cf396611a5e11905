// Copyright 2026 The lnchip Authors
// SPDX-License-Identifier: Apache-2.0
//
// From output quantum states to what the lab records: expected singles and
// coincidence rates with detector efficiency, dark counts and accidentals;
// seeded Poisson count records; the delay-line two-photon interference scan
// through an external 50:50 fiber splitter; and pair-brightness arithmetic.
//
// Counting conventions:
//  - Each output port feeds a bucket of two detectors behind a 50:50 tap, so
//    a two-photon event in one port registers a same-port coincidence with
//    probability eta^2 / 2. Cross-port coincidences treat each bucket as one
//    detector of efficiency eta.
//  - Singles count photons of surviving pairs plus dark counts; multi-pair
//    emission enters only through the accidental estimate S_a S_b tau_w,
//    which is exact in the CW low-flux regime.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lnchip/detail/rng.hpp"
#include "lnchip/fock_state.hpp"
#include "lnchip/phase_match.hpp"

namespace lnchip::detect {

using fock::StateVector;

struct DetectorModel {
  double efficiency_r1 = 0.1;
  double efficiency_r4 = 0.1;
  double dark_rate_hz = 100.0;
  double coincidence_window_ns = 1.0;

  void validate() const {
    if (!(efficiency_r1 >= 0.0 && efficiency_r1 <= 1.0) ||
        !(efficiency_r4 >= 0.0 && efficiency_r4 <= 1.0)) {
      throw std::invalid_argument("detector efficiency outside [0,1]");
    }
    if (dark_rate_hz < 0.0) throw std::invalid_argument("dark rate must be non-negative");
    if (!(coincidence_window_ns > 0.0)) throw std::invalid_argument("window must be positive");
  }
};

/// Expected rates (Hz) for the three coincidence pairs, the port singles and
/// the accidental rate of each pair.
struct PairRates {
  double coinc_r1r4 = 0.0;
  double coinc_r1r1 = 0.0;
  double coinc_r4r4 = 0.0;
  double singles_r1 = 0.0;
  double singles_r4 = 0.0;
  double acc_r1r4 = 0.0;
  double acc_r1r1 = 0.0;
  double acc_r4r4 = 0.0;
};

/// Two-photon pattern weights feeding the counting model: conditional
/// probabilities plus the probability that the pair survived to the
/// detectors at all.
struct PatternWeights {
  double p_separated = 0.0;
  double p_bunched_r1 = 0.0;
  double p_bunched_r4 = 0.0;
  double success_probability = 1.0;
};

inline PairRates coincidence_rates(const PatternWeights& w, double pair_rate_hz,
                                   const DetectorModel& det) {
  if (pair_rate_hz < 0.0) throw std::invalid_argument("coincidence_rates: negative pair rate");
  det.validate();

  const double p11 = w.p_separated;
  const double p20 = w.p_bunched_r1;
  const double p02 = w.p_bunched_r4;
  const double r = pair_rate_hz * w.success_probability;
  const double e1 = det.efficiency_r1;
  const double e4 = det.efficiency_r4;
  const double tau_s = det.coincidence_window_ns * 1e-9;

  PairRates out;
  out.coinc_r1r4 = r * p11 * e1 * e4;
  out.coinc_r1r1 = r * p20 * 0.5 * e1 * e1;
  out.coinc_r4r4 = r * p02 * 0.5 * e4 * e4;
  out.singles_r1 = r * (p11 + 2.0 * p20) * e1 + 2.0 * det.dark_rate_hz;
  out.singles_r4 = r * (p11 + 2.0 * p02) * e4 + 2.0 * det.dark_rate_hz;
  out.acc_r1r4 = out.singles_r1 * out.singles_r4 * tau_s;
  out.acc_r1r1 = (out.singles_r1 / 2.0) * (out.singles_r1 / 2.0) * tau_s;
  out.acc_r4r4 = (out.singles_r4 / 2.0) * (out.singles_r4 / 2.0) * tau_s;
  return out;
}

/// True rates from a two-mode output state (modes R1, R4) at the given pair
/// generation rate. The state's success probability scales all pair-driven
/// terms.
inline PairRates coincidence_rates(const StateVector& state, double pair_rate_hz,
                                   const DetectorModel& det) {
  if (state.modes() != 2) throw std::invalid_argument("coincidence_rates: need a 2-mode state");
  return coincidence_rates(
      PatternWeights{pattern_probability(state, fock::pattern({1, 1})),
                     pattern_probability(state, fock::pattern({2, 0})),
                     pattern_probability(state, fock::pattern({0, 2})),
                     state.success_probability()},
      pair_rate_hz, det);
}

/// Simulated counts for one sweep point. Raw coincidences include the
/// accidental background; estimated_acc_* is the estimate an experimenter
/// would form from the recorded singles (S_a S_b tau_w T).
struct CountRecord {
  double duration_s = 0.0;
  long long singles_r1 = 0;
  long long singles_r4 = 0;
  long long coinc_r1r4 = 0;
  long long coinc_r1r1 = 0;
  long long coinc_r4r4 = 0;
  double estimated_acc_r1r4 = 0.0;
  double estimated_acc_r1r1 = 0.0;
  double estimated_acc_r4r4 = 0.0;
  std::uint64_t seed = 0;
  double coincidence_window_ns = 1.0;
};

/// Poisson-samples every channel. Deterministic for a given seed; sweep
/// points use detail::derive_seed(master, point_index) as their seed.
/// Draw order: singles R1, singles R4, then the three coincidence pairs.
inline CountRecord simulate_counts(const PairRates& rates, double duration_s, std::uint64_t seed,
                                   double coincidence_window_ns = 1.0) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("simulate_counts: duration must be positive");
  detail::CountSampler sampler(seed);
  CountRecord rec;
  rec.duration_s = duration_s;
  rec.seed = seed;
  rec.coincidence_window_ns = coincidence_window_ns;
  rec.singles_r1 = sampler.poisson(rates.singles_r1 * duration_s);
  rec.singles_r4 = sampler.poisson(rates.singles_r4 * duration_s);
  rec.coinc_r1r4 = sampler.poisson((rates.coinc_r1r4 + rates.acc_r1r4) * duration_s);
  rec.coinc_r1r1 = sampler.poisson((rates.coinc_r1r1 + rates.acc_r1r1) * duration_s);
  rec.coinc_r4r4 = sampler.poisson((rates.coinc_r4r4 + rates.acc_r4r4) * duration_s);

  const double tau_s = coincidence_window_ns * 1e-9;
  const double s1 = static_cast<double>(rec.singles_r1);
  const double s4 = static_cast<double>(rec.singles_r4);
  rec.estimated_acc_r1r4 = s1 * s4 * tau_s / duration_s;
  rec.estimated_acc_r1r1 = (s1 / 2.0) * (s1 / 2.0) * tau_s / duration_s;
  rec.estimated_acc_r4r4 = (s4 / 2.0) * (s4 / 2.0) * tau_s / duration_s;
  return rec;
}

/// Expectation values in count units (no sampling); raw coincidences again
/// include the accidental background so that subtraction recovers the truth.
struct ExpectedCounts {
  double singles_r1, singles_r4;
  double coinc_r1r4, coinc_r1r1, coinc_r4r4;
  double acc_r1r4, acc_r1r1, acc_r4r4;
};

inline ExpectedCounts expected_counts(const PairRates& rates, double duration_s) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("expected_counts: duration must be positive");
  return ExpectedCounts{rates.singles_r1 * duration_s,
                        rates.singles_r4 * duration_s,
                        (rates.coinc_r1r4 + rates.acc_r1r4) * duration_s,
                        (rates.coinc_r1r1 + rates.acc_r1r1) * duration_s,
                        (rates.coinc_r4r4 + rates.acc_r4r4) * duration_s,
                        rates.acc_r1r4 * duration_s,
                        rates.acc_r1r1 * duration_s,
                        rates.acc_r4r4 * duration_s};
}

struct HomPoint {
  double delay_ps;
  double coincidence_probability;
};

/// Coincidence probability between the outputs of an external 50:50 fiber
/// splitter versus relative delay. The separated |1,1> component interferes,
///   C11(tau) = (1 - mu * Int rho(nu) cos(2 nu tau) dnu) / 2,
/// while bunched components contribute a delay-independent 1/2. Input
/// patterns combine incoherently, weighted by their conditional
/// probabilities; C(inf) -> 1/2. mode_overlap mu covers any residual
/// non-delay distinguishability (1 = none).
inline std::vector<HomPoint> hom_scan(const StateVector& state, const qpm::SpdcSpectrum& spectrum,
                                      const std::vector<double>& delays_ps,
                                      double mode_overlap = 1.0) {
  if (state.modes() != 2) throw std::invalid_argument("hom_scan: need a 2-mode state");
  if (mode_overlap < 0.0 || mode_overlap > 1.0) {
    throw std::invalid_argument("hom_scan: mode overlap outside [0,1]");
  }
  const std::size_t n = spectrum.density.size();
  if (n < 2 || spectrum.detuning_rad_per_ps.size() != n) {
    throw std::invalid_argument("hom_scan: malformed spectrum");
  }
  if (std::abs(spectrum.integral() - 1.0) > 1e-6) {
    throw std::invalid_argument("hom_scan: spectrum not normalized to unit integral");
  }

  const double p11 = pattern_probability(state, fock::pattern({1, 1}));
  const double p_bunched = pattern_probability(state, fock::pattern({2, 0})) +
                           pattern_probability(state, fock::pattern({0, 2}));
  const double step = spectrum.grid_step();

  std::vector<HomPoint> out;
  out.reserve(delays_ps.size());
  for (double tau : delays_ps) {
    double transform = 0.5 * (spectrum.density.front() * std::cos(2.0 * spectrum.detuning_rad_per_ps.front() * tau) +
                              spectrum.density.back() * std::cos(2.0 * spectrum.detuning_rad_per_ps.back() * tau));
    for (std::size_t i = 1; i + 1 < n; ++i) {
      transform += spectrum.density[i] * std::cos(2.0 * spectrum.detuning_rad_per_ps[i] * tau);
    }
    transform *= step;
    const double c11 = 0.5 * (1.0 - mode_overlap * transform);
    out.push_back(HomPoint{tau, p11 * c11 + p_bunched * 0.5});
  }
  return out;
}

/// Pairs per second per nm of bandwidth per mW of coupled pump power.
inline double pair_brightness(double pair_rate_hz, double coupled_pump_power_mw,
                              double bandwidth_nm) {
  if (!(coupled_pump_power_mw > 0.0)) throw std::domain_error("pair_brightness: power must be positive");
  if (!(bandwidth_nm > 0.0)) throw std::domain_error("pair_brightness: bandwidth must be positive");
  if (pair_rate_hz < 0.0) throw std::domain_error("pair_brightness: negative rate");
  return pair_rate_hz / (coupled_pump_power_mw * bandwidth_nm);
}

}  // namespace lnchip::detect
