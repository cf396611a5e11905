// Copyright 2026 The lnchip Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dispersion and quasi-phase-matching: temperature-dependent extraordinary
// index of congruent lithium niobate, first-order collinear type-0 QPM
// mismatch, SHG/degenerate-pair wavelength per poling period, the 9-channel
// wafer table, and the filtered SPDC spectral density that feeds the
// two-photon interference model.
//
// Proton-exchanged waveguide dispersion differs from the bulk crystal; the
// model carries a single additive wavelength-offset calibration that maps
// the bulk phase-matching curve onto the waveguide one. It shifts the curve
// without reshaping it and is frozen so that a 15.32 um grating at 25.5 C
// phase-matches 1560 nm.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lnchip/errors.hpp"

namespace lnchip::qpm {

inline constexpr double kSpeedOfLightUmPerPs = 299.792458;

/// Extraordinary-index Sellmeier set with temperature dependence:
///   f = (T - 24.5)(T + 570.82)
///   n^2 = a1 + b1 f + (a2 + b2 f)/(L^2 - (a3 + b3 f)^2)
///         + (a4 + b4 f)/(L^2 - a5^2) - a6 L^2,  L in um.
struct SellmeierModel {
  std::string name;
  std::array<double, 6> a;
  std::array<double, 4> b;
  double min_wavelength_nm;
  double max_wavelength_nm;
  double min_temperature_c;
  double max_temperature_c;
  /// Additive bulk-to-waveguide correction applied on the fundamental
  /// wavelength axis of the phase-matching functions (nm).
  double wavelength_calibration_nm = 0.0;
};

/// Congruent LiNbO3, n_e, with the frozen waveguide calibration (channel 5,
/// 15.32 um, phase-matched at 1560 nm at 25.5 C).
inline SellmeierModel congruent_linbo3_ne() {
  return SellmeierModel{
      "cln_ne_jundt1997",
      {5.35583, 0.100473, 0.20692, 100.0, 11.34927, 1.5334e-2},
      {4.629e-7, 3.862e-8, -0.89e-8, 2.657e-5},
      400.0,
      5000.0,
      20.0,
      250.0,
      143.476398434268};
}

/// n_e(lambda, T). Throws std::out_of_range outside the model validity.
inline double refractive_index(const SellmeierModel& m, double wavelength_nm,
                               double temperature_c) {
  if (!(wavelength_nm >= m.min_wavelength_nm && wavelength_nm <= m.max_wavelength_nm)) {
    throw std::out_of_range("refractive_index: wavelength " + std::to_string(wavelength_nm) +
                            " nm outside model validity");
  }
  if (!(temperature_c >= m.min_temperature_c && temperature_c <= m.max_temperature_c)) {
    throw std::out_of_range("refractive_index: temperature " + std::to_string(temperature_c) +
                            " C outside model validity");
  }
  const double lam = wavelength_nm * 1e-3;  // um
  const double lam2 = lam * lam;
  const double f = (temperature_c - 24.5) * (temperature_c + 570.82);
  const double pole = m.a[2] + m.b[2] * f;
  const double n2 = m.a[0] + m.b[0] * f + (m.a[1] + m.b[1] * f) / (lam2 - pole * pole) +
                    (m.a[3] + m.b[3] * f) / (lam2 - m.a[4] * m.a[4]) - m.a[5] * lam2;
  if (!(n2 > 0.0)) throw std::out_of_range("refractive_index: evaluated outside physical range");
  return std::sqrt(n2);
}

struct QpmGrating {
  double poling_period_um;
  double length_mm;
  double temperature_c;

  void validate() const {
    if (!(poling_period_um > 0.0)) throw std::invalid_argument("grating: period must be positive");
    if (!(length_mm > 0.0)) throw std::invalid_argument("grating: length must be positive");
  }
};

namespace detail {

// Full wavevector at a calibrated wavelength: the calibration offset maps
// the point onto the bulk dispersion axis before evaluation. Pump-side
// quantities shift by half the fundamental offset.
inline double wavevector_rad_per_um(const SellmeierModel& m, double wavelength_nm,
                                    double temperature_c, double calibration_fraction) {
  const double raw_nm = wavelength_nm - calibration_fraction * m.wavelength_calibration_nm;
  const double n = refractive_index(m, raw_nm, temperature_c);
  return 2.0 * std::numbers::pi * n / (raw_nm * 1e-3);
}

}  // namespace detail

/// First-order collinear QPM mismatch for SHG / degenerate SPDC at the
/// fundamental wavelength (nm), in rad/um:
///   dk = k(lambda/2) - 2 k(lambda) - 2 pi / period.
/// Zero exactly at the phase-matched wavelength.
inline double qpm_mismatch(const SellmeierModel& m, const QpmGrating& g,
                           double fundamental_wavelength_nm) {
  g.validate();
  const double k_half =
      detail::wavevector_rad_per_um(m, fundamental_wavelength_nm / 2.0, g.temperature_c, 0.5);
  const double k_fund =
      detail::wavevector_rad_per_um(m, fundamental_wavelength_nm, g.temperature_c, 1.0);
  return k_half - 2.0 * k_fund - 2.0 * std::numbers::pi / g.poling_period_um;
}

/// Phase-matched fundamental wavelength: bracketed bisection root of
/// qpm_mismatch, guaranteed to 1e-3 nm (iterated to machine tightness).
/// Throws std::domain_error when no sign change exists in the bracket.
inline double shg_wavelength(const SellmeierModel& m, const QpmGrating& g,
                             double bracket_lo_nm = 1400.0, double bracket_hi_nm = 1700.0) {
  g.validate();
  double lo = bracket_lo_nm;
  double hi = bracket_hi_nm;
  double f_lo = qpm_mismatch(m, g, lo);
  double f_hi = qpm_mismatch(m, g, hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw std::domain_error("shg_wavelength: no phase-matched root in bracket [" +
                            std::to_string(bracket_lo_nm) + ", " + std::to_string(bracket_hi_nm) +
                            "] nm");
  }
  for (int i = 0; i < 200 && (hi - lo) > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = qpm_mismatch(m, g, mid);
    if (f_mid == 0.0) return mid;
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct ChannelRow {
  int channel;
  double period_um;
  double shg_wavelength_nm;
};

/// Wafer design: poling periods 14.36..16.28 um in steps of 0.24 um.
inline std::vector<double> default_poling_periods() {
  std::vector<double> periods;
  periods.reserve(9);
  for (int k = 0; k < 9; ++k) periods.push_back(14.36 + 0.24 * k);
  return periods;
}

/// One row per poling period, in input order.
inline std::vector<ChannelRow> channel_table(const SellmeierModel& m,
                                             const std::vector<double>& periods_um,
                                             double temperature_c,
                                             double crystal_length_mm = 10.0) {
  if (periods_um.empty()) throw std::invalid_argument("channel_table: no periods given");
  std::vector<ChannelRow> rows;
  rows.reserve(periods_um.size());
  for (std::size_t i = 0; i < periods_um.size(); ++i) {
    const QpmGrating g{periods_um[i], crystal_length_mm, temperature_c};
    rows.push_back(ChannelRow{static_cast<int>(i) + 1, periods_um[i], shg_wavelength(m, g)});
  }
  return rows;
}

/// Bandpass in front of the detectors; Gaussian profile with the given FWHM.
struct OpticalFilter {
  double center_nm = 1560.0;
  double bandwidth_fwhm_nm = 14.0;

  void validate() const {
    if (!(center_nm > 0.0)) throw std::invalid_argument("filter: center must be positive");
    if (!(bandwidth_fwhm_nm > 0.0)) throw std::invalid_argument("filter: bandwidth must be positive");
  }
};

/// Filtered degenerate-SPDC spectral density, sampled on a symmetric grid of
/// angular-frequency detunings (rad/ps) around half the pump frequency.
/// Trapezoid-normalized to unit integral.
struct SpdcSpectrum {
  std::vector<double> detuning_rad_per_ps;
  std::vector<double> density;
  double pump_wavelength_nm = 0.0;

  double grid_step() const {
    return detuning_rad_per_ps.size() > 1 ? detuning_rad_per_ps[1] - detuning_rad_per_ps[0] : 0.0;
  }

  double integral() const {
    if (density.size() < 2) return 0.0;
    double sum = 0.5 * (density.front() + density.back());
    for (std::size_t i = 1; i + 1 < density.size(); ++i) sum += density[i];
    return sum * grid_step();
  }
};

/// density(nu) ~ sinc^2(dk_pair(nu) L/2) * filter(nu) * filter(-nu) with the
/// pair mismatch dk_pair = k_pump - k_signal - k_idler - 2 pi / period taken
/// from the dispersion model; signal/idler at half the pump frequency +-nu
/// (CW pump, frequencies sum exactly). Throws std::domain_error when the
/// filter excludes all phase-matched light.
inline SpdcSpectrum spdc_spectrum(const SellmeierModel& m, const QpmGrating& g,
                                  double pump_wavelength_nm, const OpticalFilter& filter,
                                  int n_points = 4001) {
  g.validate();
  filter.validate();
  if (!(pump_wavelength_nm > 0.0)) throw std::invalid_argument("spdc_spectrum: bad pump wavelength");
  if (n_points < 32) throw std::invalid_argument("spdc_spectrum: grid too coarse");
  const int half = n_points / 2;
  const int count = 2 * half + 1;  // symmetric grid including nu = 0

  const double omega_pump =
      2.0 * std::numbers::pi * kSpeedOfLightUmPerPs / (pump_wavelength_nm * 1e-3);
  const double omega_degenerate = omega_pump / 2.0;
  const double k_pump =
      detail::wavevector_rad_per_um(m, pump_wavelength_nm, g.temperature_c, 0.5);
  const double grating_k = 2.0 * std::numbers::pi / g.poling_period_um;
  const double length_um = g.length_mm * 1e3;

  // Filter in angular frequency, FWHM -> sigma.
  const double center_um = filter.center_nm * 1e-3;
  const double domega_fwhm = 2.0 * std::numbers::pi * kSpeedOfLightUmPerPs *
                             (filter.bandwidth_fwhm_nm * 1e-3) / (center_um * center_um);
  const double sigma = domega_fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  const double omega_center =
      2.0 * std::numbers::pi * kSpeedOfLightUmPerPs / center_um;
  const double nu_center = omega_center - omega_degenerate;
  const double nu_max = 4.0 * sigma + std::abs(nu_center);

  SpdcSpectrum spec;
  spec.pump_wavelength_nm = pump_wavelength_nm;
  spec.detuning_rad_per_ps.resize(count);
  spec.density.resize(count);
  // Fill nu >= 0 and mirror; the density is symmetric in the detuning by
  // construction (signal and idler trade places).
  const double step = nu_max / half;
  for (int i = half; i < count; ++i) {
    const double nu = (i - half) * step;
    spec.detuning_rad_per_ps[i] = nu;
    if (i > half) spec.detuning_rad_per_ps[count - 1 - i] = -nu;
    const double lam_signal_nm =
        2.0 * std::numbers::pi * kSpeedOfLightUmPerPs / (omega_degenerate + nu) * 1e3;
    const double lam_idler_nm =
        2.0 * std::numbers::pi * kSpeedOfLightUmPerPs / (omega_degenerate - nu) * 1e3;
    const double dk = k_pump -
                      detail::wavevector_rad_per_um(m, lam_signal_nm, g.temperature_c, 1.0) -
                      detail::wavevector_rad_per_um(m, lam_idler_nm, g.temperature_c, 1.0) -
                      grating_k;
    const double x = dk * length_um / 2.0;
    const double sinc = (std::abs(x) < 1e-8) ? 1.0 : std::sin(x) / x;
    const double f_plus = std::exp(-0.5 * (nu - nu_center) * (nu - nu_center) / (sigma * sigma));
    const double f_minus = std::exp(-0.5 * (nu + nu_center) * (nu + nu_center) / (sigma * sigma));
    spec.density[i] = sinc * sinc * f_plus * f_minus;
    spec.density[count - 1 - i] = spec.density[i];
  }
  const double integral = spec.integral();
  if (!(integral > 1e-300)) {
    throw std::domain_error("spdc_spectrum: filter excludes all phase-matched light");
  }
  for (double& d : spec.density) d /= integral;
  return spec;
}

/// Loads a named coefficient set from a JSON document of the form
/// {"model_name": {"a": [...6], "b": [...4], "wavelength_range_nm": [lo, hi],
///  "temperature_range_c": [lo, hi], "wavelength_calibration_nm": x}}.
inline SellmeierModel sellmeier_from_json(const nlohmann::json& doc, const std::string& name) {
  if (!doc.is_object() || !doc.contains(name)) {
    throw config_error("sellmeier: no model named '" + name + "' in document");
  }
  const auto& j = doc.at(name);
  for (const char* key : {"a", "b", "wavelength_range_nm", "temperature_range_c",
                          "wavelength_calibration_nm"}) {
    if (!j.contains(key)) throw config_error("sellmeier '" + name + "': missing field '" + key + "'");
  }
  SellmeierModel m;
  m.name = name;
  const auto& a = j.at("a");
  const auto& b = j.at("b");
  if (!a.is_array() || a.size() != 6) throw config_error("sellmeier: 'a' must have 6 entries");
  if (!b.is_array() || b.size() != 4) throw config_error("sellmeier: 'b' must have 4 entries");
  for (int i = 0; i < 6; ++i) m.a[i] = a[i].get<double>();
  for (int i = 0; i < 4; ++i) m.b[i] = b[i].get<double>();
  m.min_wavelength_nm = j.at("wavelength_range_nm")[0].get<double>();
  m.max_wavelength_nm = j.at("wavelength_range_nm")[1].get<double>();
  m.min_temperature_c = j.at("temperature_range_c")[0].get<double>();
  m.max_temperature_c = j.at("temperature_range_c")[1].get<double>();
  m.wavelength_calibration_nm = j.at("wavelength_calibration_nm").get<double>();
  return m;
}

}  // namespace lnchip::qpm
