// Copyright 2026 The lnchip Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parameterized model of the reconfigurable waveguide chip: pump split with
// electro-optic phase, twin photon-pair sources in the poled section, the
// 2x2 coupler C1, and the wavelength filters C2/C2' that hand the pair to the
// output waveguides R1/R4. Output states live on modes (R1, R4) in that
// order.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lnchip/errors.hpp"
#include "lnchip/fock_state.hpp"

namespace lnchip::chip {

using fock::Complex;
using fock::FockPattern;
using fock::StateVector;

/// Electrode stack above the pump waveguides. Units: eo_coefficient pm/V,
/// electrode_length mm, electrode_gap um, pump_wavelength nm.
struct ElectrodeGeometry {
  double fill_factor = 0.30;
  double eo_coefficient = 30.8;
  double pump_index = 2.17813950394993;
  double electrode_length = 10.0;
  double electrode_gap = 6.0;
  double pump_wavelength = 780.0;

  void validate() const {
    if (!(fill_factor > 0.0 && fill_factor <= 1.0)) {
      throw config_error("electrode.fill_factor must be in (0,1]");
    }
    if (!(eo_coefficient > 0.0)) throw config_error("electrode.eo_coefficient must be positive");
    if (!(pump_index > 0.0)) throw config_error("electrode.pump_index must be positive");
    if (!(electrode_length > 0.0)) throw config_error("electrode.electrode_length must be positive");
    if (!(electrode_gap > 0.0)) throw config_error("electrode.electrode_gap must be positive");
    if (!(pump_wavelength > 0.0)) throw config_error("electrode.pump_wavelength must be positive");
  }
};

/// Pump phase difference accumulated between the two arms at bias U, linear
/// in U: 2*pi*G*g33*n^3*L*U / (lambda_p * d).
inline double eo_phase(const ElectrodeGeometry& g, double u_volts) {
  g.validate();
  const double g33_m_per_v = g.eo_coefficient * 1e-12;
  const double length_m = g.electrode_length * 1e-3;
  const double gap_m = g.electrode_gap * 1e-6;
  const double lambda_m = g.pump_wavelength * 1e-9;
  const double n3 = g.pump_index * g.pump_index * g.pump_index;
  return 2.0 * std::numbers::pi * g.fill_factor * g33_m_per_v * n3 * length_m * u_volts /
         (lambda_m * gap_m);
}

/// Bias that produces a pi phase shift; the fringe period in voltage is twice
/// this value.
inline double half_wave_voltage(const ElectrodeGeometry& g) {
  g.validate();
  const double g33_m_per_v = g.eo_coefficient * 1e-12;
  const double length_m = g.electrode_length * 1e-3;
  const double gap_m = g.electrode_gap * 1e-6;
  const double lambda_m = g.pump_wavelength * 1e-9;
  const double n3 = g.pump_index * g.pump_index * g.pump_index;
  return lambda_m * gap_m / (2.0 * g.fill_factor * g33_m_per_v * n3 * length_m);
}

/// Static phase offset that places the separated-state bias at u_offset
/// volts (models fabrication path difference / DC drift as a constant).
inline double phase_offset_for_bias(const ElectrodeGeometry& g, double u_offset_volts) {
  return -eo_phase(g, u_offset_volts);
}

/// Full chip parameterization. arm_alpha/arm_beta are the pair-generation
/// amplitudes of waveguides 2 and 3; they absorb pump-split imbalance, SPDC
/// efficiency difference and arm loss (only the combined ratio is
/// observable). coupler_c1_ratio is the power cross-coupling of C1.
/// filter_c2_efficiency is the per-photon power transfer of C2/C2'.
/// Units: poling_period um, crystal_length mm, temperature C,
/// pump_power_in_fiber uW.
struct ChipConfig {
  ElectrodeGeometry electrode;
  double coupler_c1_ratio = 0.5;
  double filter_c2_efficiency = 1.0;
  Complex arm_alpha{std::numbers::sqrt2 / 2.0, 0.0};
  Complex arm_beta{std::numbers::sqrt2 / 2.0, 0.0};
  double phase_offset = 0.0;
  double poling_period = 15.32;
  double crystal_length = 10.0;
  double temperature = 25.5;
  double pump_power_in_fiber = 39.0;
  double fiber_coupling_efficiency = 0.8;

  void validate() const {
    electrode.validate();
    if (!(coupler_c1_ratio >= 0.0 && coupler_c1_ratio <= 1.0)) {
      throw config_error("coupler_c1_ratio must be in [0,1]");
    }
    if (!(filter_c2_efficiency >= 0.0 && filter_c2_efficiency <= 1.0)) {
      throw config_error("filter_c2_efficiency must be in [0,1]");
    }
    const double norm = std::norm(arm_alpha) + std::norm(arm_beta);
    if (!(norm > 0.0)) throw config_error("arm_amplitudes must not both vanish");
    if (!(poling_period > 0.0)) throw config_error("poling_period must be positive");
    if (!(crystal_length > 0.0)) throw config_error("crystal_length must be positive");
    if (!(temperature >= 20.0 && temperature <= 250.0)) {
      throw config_error("temperature outside dispersion-model validity (20..250 C)");
    }
    if (!(pump_power_in_fiber > 0.0)) throw config_error("pump_power_in_fiber must be positive");
    if (!(fiber_coupling_efficiency >= 0.0 && fiber_coupling_efficiency <= 1.0)) {
      throw config_error("fiber_coupling_efficiency must be in [0,1]");
    }
    if (!std::isfinite(phase_offset)) throw config_error("phase_offset must be finite");
  }

  /// Rescales (alpha, beta) so |alpha|^2 + |beta|^2 = 1.
  void normalize_arms() {
    const double norm = std::sqrt(std::norm(arm_alpha) + std::norm(arm_beta));
    if (!(norm > 0.0)) throw config_error("arm_amplitudes must not both vanish");
    arm_alpha /= norm;
    arm_beta /= norm;
  }

  /// Pump power reaching the waveguide, in mW.
  double coupled_pump_power_mw() const {
    return pump_power_in_fiber * 1e-3 * fiber_coupling_efficiency;
  }
};

/// Balanced lossless reference chip.
inline ChipConfig ideal_config() { return ChipConfig{}; }

/// State after the poled section on modes (waveguide 2, waveguide 3):
/// alpha|2,0> + beta e^{i(dphi(U)+phi0)}|0,2>. The electrode acts on the
/// pump, so the pair amplitude carries the phase once, not per photon.
inline StateVector source_state(const ChipConfig& config, double u_volts) {
  config.validate();
  ChipConfig c = config;
  c.normalize_arms();
  const double theta = eo_phase(c.electrode, u_volts) + c.phase_offset;
  const Complex pair_phase = std::exp(Complex{0.0, theta});
  return StateVector(2, {fock::Term{fock::pattern({2, 0}), c.arm_alpha},
                         fock::Term{fock::pattern({0, 2}), c.arm_beta * pair_phase}});
}

/// Source, coupler C1, then the C2/C2' transfer loss; output modes (R1, R4).
inline StateVector run_chip(const ChipConfig& config, double u_volts) {
  StateVector state = apply_mode_transform(source_state(config, u_volts),
                                           fock::beamsplitter(config.coupler_c1_ratio));
  if (config.filter_c2_efficiency < 1.0) {
    state = apply_mode_transform(state, fock::uniform_loss(2, config.filter_c2_efficiency));
  }
  return state;
}

/// Pattern probabilities per generated pair (success probability folded in).
struct PatternProbabilities {
  double p_separated;    // photon pair split over R1 and R4
  double p_bunched_r1;   // both photons in R1
  double p_bunched_r4;   // both photons in R4
  double success_probability;
};

inline PatternProbabilities pattern_probabilities(const ChipConfig& config, double u_volts) {
  const StateVector out = run_chip(config, u_volts);
  const double s = out.success_probability();
  return PatternProbabilities{unconditional_pattern_probability(out, fock::pattern({1, 1})),
                              unconditional_pattern_probability(out, fock::pattern({2, 0})),
                              unconditional_pattern_probability(out, fock::pattern({0, 2})), s};
}

/// Same probabilities averaged over Gaussian jitter of the interferometer
/// phase (sigma in radians); models residual drift during a measurement.
/// Gauss-Hermite quadrature, 21 nodes.
inline PatternProbabilities pattern_probabilities_with_phase_noise(const ChipConfig& config,
                                                                   double u_volts,
                                                                   double phase_noise_sigma_rad) {
  if (phase_noise_sigma_rad < 0.0) {
    throw std::invalid_argument("phase noise sigma must be non-negative");
  }
  if (phase_noise_sigma_rad == 0.0) return pattern_probabilities(config, u_volts);

  constexpr int kNodes = 21;
  // Golub-Welsch on the Hermite Jacobi matrix.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(kNodes, kNodes);
  for (int i = 1; i < kNodes; ++i) {
    const double off = std::sqrt(i / 2.0);
    jac(i - 1, i) = off;
    jac(i, i - 1) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
  const Eigen::VectorXd nodes = eig.eigenvalues();
  Eigen::VectorXd weights(kNodes);
  for (int i = 0; i < kNodes; ++i) {
    const double v0 = eig.eigenvectors()(0, i);
    weights[i] = v0 * v0;  // normalized so weights sum to 1
  }

  PatternProbabilities acc{0.0, 0.0, 0.0, 0.0};
  ChipConfig jittered = config;
  for (int i = 0; i < kNodes; ++i) {
    jittered.phase_offset =
        config.phase_offset + std::numbers::sqrt2 * phase_noise_sigma_rad * nodes[i];
    const PatternProbabilities p = pattern_probabilities(jittered, u_volts);
    acc.p_separated += weights[i] * p.p_separated;
    acc.p_bunched_r1 += weights[i] * p.p_bunched_r1;
    acc.p_bunched_r4 += weights[i] * p.p_bunched_r4;
    acc.success_probability += weights[i] * p.success_probability;
  }
  return acc;
}

struct MorphPoint {
  double u_volts;
  double p_separated;
  double p_bunched_r1;
  double p_bunched_r4;
};

/// Analytic separated/bunched probabilities across a voltage grid. For the
/// ideal chip p_separated(U) = cos^2(pi U / 2 V_pi) and each bunched column
/// is sin^2(pi U / 2 V_pi)/2.
inline std::vector<MorphPoint> morph_curve(const ChipConfig& config,
                                           const std::vector<double>& u_grid) {
  if (u_grid.empty()) throw std::invalid_argument("morph_curve: empty voltage grid");
  std::vector<MorphPoint> out;
  out.reserve(u_grid.size());
  for (double u : u_grid) {
    const PatternProbabilities p = pattern_probabilities(config, u);
    out.push_back(MorphPoint{u, p.p_separated, p.p_bunched_r1, p.p_bunched_r4});
  }
  return out;
}

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::vector<std::string>& keys,
                         const std::string& where) {
  for (const auto& key : keys) {
    if (!j.contains(key)) throw config_error(where + ": missing field '" + key + "'");
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw config_error(where + ": unknown field '" + key + "'");
    }
  }
}

inline double get_number(const nlohmann::json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw config_error(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline Complex get_complex(const nlohmann::json& j, const std::string& key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw config_error(where + ": field '" + key + "' must be [re, im]");
  }
  return Complex{v[0].get<double>(), v[1].get<double>()};
}

}  // namespace detail

/// Strict parse: exactly the documented fields, unknown fields rejected,
/// arm amplitudes normalized on load.
inline ChipConfig chip_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw config_error("chip config: expected a JSON object");
  detail::require_keys(j,
                       {"electrode", "coupler_c1_ratio", "filter_c2_efficiency", "arm_amplitudes",
                        "phase_offset", "poling_period", "crystal_length", "temperature",
                        "pump_power_in_fiber", "fiber_coupling_efficiency"},
                       "chip config");
  const auto& je = j.at("electrode");
  if (!je.is_object()) throw config_error("chip config: 'electrode' must be an object");
  detail::require_keys(je,
                       {"fill_factor", "eo_coefficient", "pump_index", "electrode_length",
                        "electrode_gap", "pump_wavelength"},
                       "electrode");
  ChipConfig c;
  c.electrode.fill_factor = detail::get_number(je, "fill_factor", "electrode");
  c.electrode.eo_coefficient = detail::get_number(je, "eo_coefficient", "electrode");
  c.electrode.pump_index = detail::get_number(je, "pump_index", "electrode");
  c.electrode.electrode_length = detail::get_number(je, "electrode_length", "electrode");
  c.electrode.electrode_gap = detail::get_number(je, "electrode_gap", "electrode");
  c.electrode.pump_wavelength = detail::get_number(je, "pump_wavelength", "electrode");

  const auto& ja = j.at("arm_amplitudes");
  if (!ja.is_object()) throw config_error("chip config: 'arm_amplitudes' must be an object");
  detail::require_keys(ja, {"alpha", "beta"}, "arm_amplitudes");
  c.arm_alpha = detail::get_complex(ja, "alpha", "arm_amplitudes");
  c.arm_beta = detail::get_complex(ja, "beta", "arm_amplitudes");

  c.coupler_c1_ratio = detail::get_number(j, "coupler_c1_ratio", "chip config");
  c.filter_c2_efficiency = detail::get_number(j, "filter_c2_efficiency", "chip config");
  c.phase_offset = detail::get_number(j, "phase_offset", "chip config");
  c.poling_period = detail::get_number(j, "poling_period", "chip config");
  c.crystal_length = detail::get_number(j, "crystal_length", "chip config");
  c.temperature = detail::get_number(j, "temperature", "chip config");
  c.pump_power_in_fiber = detail::get_number(j, "pump_power_in_fiber", "chip config");
  c.fiber_coupling_efficiency = detail::get_number(j, "fiber_coupling_efficiency", "chip config");

  c.validate();
  c.normalize_arms();
  return c;
}

inline nlohmann::json chip_config_to_json(const ChipConfig& c) {
  return nlohmann::json{
      {"electrode",
       {{"fill_factor", c.electrode.fill_factor},
        {"eo_coefficient", c.electrode.eo_coefficient},
        {"pump_index", c.electrode.pump_index},
        {"electrode_length", c.electrode.electrode_length},
        {"electrode_gap", c.electrode.electrode_gap},
        {"pump_wavelength", c.electrode.pump_wavelength}}},
      {"coupler_c1_ratio", c.coupler_c1_ratio},
      {"filter_c2_efficiency", c.filter_c2_efficiency},
      {"arm_amplitudes",
       {{"alpha", {c.arm_alpha.real(), c.arm_alpha.imag()}},
        {"beta", {c.arm_beta.real(), c.arm_beta.imag()}}}},
      {"phase_offset", c.phase_offset},
      {"poling_period", c.poling_period},
      {"crystal_length", c.crystal_length},
      {"temperature", c.temperature},
      {"pump_power_in_fiber", c.pump_power_in_fiber},
      {"fiber_coupling_efficiency", c.fiber_coupling_efficiency}};
}

}  // namespace lnchip::chip
