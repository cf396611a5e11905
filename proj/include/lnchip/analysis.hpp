// Copyright 2026 The lnchip Authors
// SPDX-License-Identifier: Apache-2.0
//
// Extraction of the headline numbers from scan data: accidental subtraction
// with sqrt(N) error propagation, weighted sinusoidal fringe fits
// (visibility, fringe period = 2 V_pi, offset bias) and two-photon dip fits.
// Fitting is damped least squares with a deterministic multi-start; point
// uncertainties follow the sqrt(counts) convention, parameter errors come
// from the fit covariance.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "lnchip/errors.hpp"
#include "lnchip/phase_match.hpp"

namespace lnchip::fit {

/// Fringe/dip contrast (R_max - R_min) / (R_max + R_min).
inline double visibility(double r_max, double r_min) {
  if (r_min < 0.0 || r_max < r_min) {
    throw std::invalid_argument("visibility: need r_max >= r_min >= 0");
  }
  if (r_max == 0.0) throw std::invalid_argument("visibility: both rates zero");
  return (r_max - r_min) / (r_max + r_min);
}

struct CorrectedCount {
  double value;
  double sigma;   // sqrt(raw + accidentals)
  bool floored;   // accidentals exceeded the raw counts
};

/// raw - estimated accidentals, floored at zero with a warning flag.
inline CorrectedCount subtract_accidentals(double raw_counts, double accidental_estimate) {
  if (raw_counts < 0.0 || accidental_estimate < 0.0) {
    throw std::invalid_argument("subtract_accidentals: negative input");
  }
  const double corrected = raw_counts - accidental_estimate;
  return CorrectedCount{std::max(corrected, 0.0), std::sqrt(raw_counts + accidental_estimate),
                        corrected < 0.0};
}

struct WeightedPoint {
  double x;
  double y;
  double sigma;
};

namespace detail {

struct LmResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;
  double chi2 = 0.0;
  int ndf = 0;
  bool converged = false;
};

inline double chi_squared(const std::function<double(double, const Eigen::VectorXd&)>& model,
                          std::span<const WeightedPoint> pts, const Eigen::VectorXd& p) {
  double chi2 = 0.0;
  for (const auto& pt : pts) {
    const double r = (pt.y - model(pt.x, p)) / pt.sigma;
    chi2 += r * r;
  }
  return chi2;
}

// Damped weighted least squares with numeric central-difference Jacobian.
// Convergence: relative step below 1e-10, capped at 200 iterations.
inline LmResult levenberg_marquardt(const std::function<double(double, const Eigen::VectorXd&)>& model,
                                    std::span<const WeightedPoint> pts, Eigen::VectorXd p0) {
  constexpr int kMaxIter = 200;
  constexpr double kRelStepTol = 1e-10;
  const int n = static_cast<int>(pts.size());
  const int k = static_cast<int>(p0.size());

  Eigen::VectorXd p = std::move(p0);
  double chi2 = chi_squared(model, pts, p);
  double lambda = 1e-3;
  bool converged = false;

  Eigen::MatrixXd jac(n, k);
  Eigen::VectorXd resid(n);
  for (int iter = 0; iter < kMaxIter && !converged; ++iter) {
    for (int i = 0; i < n; ++i) {
      resid[i] = (pts[i].y - model(pts[i].x, p)) / pts[i].sigma;
    }
    for (int j = 0; j < k; ++j) {
      const double h = 1e-7 * (std::abs(p[j]) + 1e-7);
      Eigen::VectorXd pp = p, pm = p;
      pp[j] += h;
      pm[j] -= h;
      for (int i = 0; i < n; ++i) {
        jac(i, j) = (model(pts[i].x, pp) - model(pts[i].x, pm)) / (2.0 * h * pts[i].sigma);
      }
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * resid;

    bool stepped = false;
    for (int attempt = 0; attempt < 12 && !stepped; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      for (int j = 0; j < k; ++j) damped(j, j) += lambda * std::max(jtj(j, j), 1e-30);
      const Eigen::VectorXd delta = damped.ldlt().solve(jtr);
      if (!delta.allFinite()) {
        lambda *= 5.0;
        continue;
      }
      const Eigen::VectorXd trial = p + delta;
      const double trial_chi2 = chi_squared(model, pts, trial);
      if (trial_chi2 <= chi2) {
        bool small = true;
        for (int j = 0; j < k; ++j) {
          if (std::abs(delta[j]) > kRelStepTol * (1.0 + std::abs(p[j]))) small = false;
        }
        p = trial;
        chi2 = trial_chi2;
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        converged = small;
      } else {
        lambda *= 5.0;
      }
    }
    if (!stepped) break;  // no downhill step found at any damping
  }

  // Covariance from the undamped normal equations at the optimum.
  for (int j = 0; j < k; ++j) {
    const double h = 1e-7 * (std::abs(p[j]) + 1e-7);
    Eigen::VectorXd pp = p, pm = p;
    pp[j] += h;
    pm[j] -= h;
    for (int i = 0; i < n; ++i) {
      jac(i, j) = (model(pts[i].x, pp) - model(pts[i].x, pm)) / (2.0 * h * pts[i].sigma);
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jac.transpose() * jac);
  LmResult out;
  out.params = p;
  out.covariance = lu.isInvertible() ? lu.inverse() : Eigen::MatrixXd::Constant(k, k, std::nan(""));
  out.chi2 = chi2;
  out.ndf = n - k;
  out.converged = converged;
  return out;
}

inline void require_positive_sigmas(std::span<const WeightedPoint> pts) {
  for (const auto& pt : pts) {
    if (!(pt.sigma > 0.0)) throw std::invalid_argument("fit: point uncertainties must be positive");
  }
}

}  // namespace detail

/// Fitted fringe C(U) = B [1 + V cos(pi (U - U_offset) / V_pi)]. `period` is
/// the full fringe period 2 V_pi; U_offset is reported in [-V_pi, V_pi).
struct FringeFit {
  double baseline = 0.0;
  double amplitude = 0.0;
  double visibility = 0.0;
  double period = 0.0;
  double u_offset = 0.0;
  double baseline_err = 0.0;
  double amplitude_err = 0.0;
  double visibility_err = 0.0;
  double period_err = 0.0;
  double u_offset_err = 0.0;
  double chi2 = 0.0;
  int ndf = 0;

  double v_pi() const { return period / 2.0; }
  double v_pi_err() const { return period_err / 2.0; }
};

inline double fold_offset(double u_offset, double period) {
  const double half = period / 2.0;
  double folded = std::fmod(u_offset + half, period);
  if (folded < 0.0) folded += period;
  return folded - half;
}

/// Weighted fringe fit. A deterministic coarse scan over candidate periods
/// (linear in baseline and quadrature amplitudes for a fixed period) seeds a
/// damped least-squares refinement started at four phases across one period.
inline FringeFit fit_fringe(std::span<const WeightedPoint> points) {
  if (points.size() < 6) throw std::invalid_argument("fit_fringe: need at least 6 points");
  detail::require_positive_sigmas(points);

  std::vector<WeightedPoint> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  const double span_x = pts.back().x - pts.front().x;
  if (!(span_x > 0.0)) throw std::invalid_argument("fit_fringe: zero x span");

  double y_min = pts[0].y, y_max = pts[0].y;
  for (const auto& p : pts) {
    y_min = std::min(y_min, p.y);
    y_max = std::max(y_max, p.y);
  }
  if (y_max - y_min <= 1e-12 * std::max(std::abs(y_max), 1.0)) {
    throw fit_error("fit_fringe: degenerate data (constant counts)");
  }

  // Coarse period scan with a linear solve per candidate.
  const double p_lo = std::max(span_x / 32.0, 4.0 * span_x / static_cast<double>(pts.size()));
  const double p_hi = 1.6 * span_x;
  constexpr int kCandidates = 256;
  double best_chi2 = std::numeric_limits<double>::infinity();
  double best_period = span_x;
  Eigen::Vector3d best_lin = Eigen::Vector3d::Zero();
  for (int c = 0; c < kCandidates; ++c) {
    const double period = p_lo * std::pow(p_hi / p_lo, c / double(kCandidates - 1));
    const double omega = 2.0 * std::numbers::pi / period;
    Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
    Eigen::Vector3d atb = Eigen::Vector3d::Zero();
    for (const auto& pt : pts) {
      const double w = 1.0 / (pt.sigma * pt.sigma);
      const Eigen::Vector3d base{1.0, std::cos(omega * pt.x), std::sin(omega * pt.x)};
      ata += w * base * base.transpose();
      atb += w * base * pt.y;
    }
    const Eigen::Vector3d sol = ata.ldlt().solve(atb);
    double chi2 = 0.0;
    for (const auto& pt : pts) {
      const double f = sol[0] + sol[1] * std::cos(omega * pt.x) + sol[2] * std::sin(omega * pt.x);
      const double r = (pt.y - f) / pt.sigma;
      chi2 += r * r;
    }
    if (chi2 < best_chi2) {
      best_chi2 = chi2;
      best_period = period;
      best_lin = sol;
    }
  }

  const double amp0 = std::hypot(best_lin[1], best_lin[2]);
  const double u0_base = std::atan2(best_lin[2], best_lin[1]) * best_period / (2.0 * std::numbers::pi);
  const auto model = [](double x, const Eigen::VectorXd& p) {
    return p[0] + p[1] * std::cos(2.0 * std::numbers::pi * (x - p[3]) / p[2]);
  };

  detail::LmResult best;
  bool have_best = false;
  for (int start = 0; start < 4; ++start) {
    Eigen::VectorXd p0(4);
    p0 << best_lin[0], std::max(amp0, 1e-6 * std::abs(best_lin[0])), best_period,
        u0_base + start * best_period / 4.0;
    detail::LmResult r = detail::levenberg_marquardt(model, pts, std::move(p0));
    if (!r.converged) continue;
    const bool better =
        !have_best || r.chi2 < best.chi2 - 1e-9 * (1.0 + best.chi2) ||
        (std::abs(r.chi2 - best.chi2) <= 1e-9 * (1.0 + best.chi2) &&
         fold_offset(r.params[3], std::abs(r.params[2])) < fold_offset(best.params[3], std::abs(best.params[2])));
    if (better) {
      best = std::move(r);
      have_best = true;
    }
  }
  if (!have_best) throw fit_error("fit_fringe: did not converge");

  double baseline = best.params[0];
  double amplitude = best.params[1];
  double period = std::abs(best.params[2]);
  double u_offset = best.params[3];
  if (amplitude < 0.0) {
    amplitude = -amplitude;
    u_offset += period / 2.0;
  }
  u_offset = fold_offset(u_offset, period);
  if (!(baseline > 0.0)) throw fit_error("fit_fringe: non-positive baseline");

  FringeFit fitted;
  fitted.baseline = baseline;
  fitted.amplitude = amplitude;
  fitted.visibility = std::clamp(amplitude / baseline, 0.0, 1.0);
  fitted.period = period;
  fitted.u_offset = u_offset;
  fitted.baseline_err = std::sqrt(std::max(best.covariance(0, 0), 0.0));
  fitted.amplitude_err = std::sqrt(std::max(best.covariance(1, 1), 0.0));
  fitted.period_err = std::sqrt(std::max(best.covariance(2, 2), 0.0));
  fitted.u_offset_err = std::sqrt(std::max(best.covariance(3, 3), 0.0));
  // Var(A/B) by first-order propagation including the A-B covariance.
  const double va = best.covariance(1, 1), vb = best.covariance(0, 0), cab = best.covariance(0, 1);
  const double dv_da = 1.0 / baseline, dv_db = -amplitude / (baseline * baseline);
  fitted.visibility_err =
      std::sqrt(std::max(dv_da * dv_da * va + dv_db * dv_db * vb + 2.0 * dv_da * dv_db * cab, 0.0));
  fitted.chi2 = best.chi2;
  fitted.ndf = best.ndf;
  return fitted;
}

/// Dip shape g for the delay-scan fit: g(0) = 1, g(+-inf) = 0; half_width is
/// the half width at half depth of g in its own argument units.
struct DipKernel {
  std::function<double(double)> g;
  double half_width;
  std::string name;
};

inline DipKernel gaussian_dip_kernel() {
  return DipKernel{[](double x) { return std::exp(-x * x); }, std::sqrt(std::numbers::ln2),
                   "gaussian"};
}

/// Kernel taken from a sampled SPDC spectrum: the same detuning-cosine
/// transform the delay scan itself uses; argument in ps.
inline DipKernel spectrum_dip_kernel(const qpm::SpdcSpectrum& spectrum) {
  if (spectrum.density.size() < 2) throw std::invalid_argument("spectrum_dip_kernel: empty spectrum");
  if (std::abs(spectrum.integral() - 1.0) > 1e-6) {
    throw std::invalid_argument("spectrum_dip_kernel: spectrum not normalized");
  }
  auto g = [spectrum](double t) {
    const std::size_t n = spectrum.density.size();
    double acc = 0.5 * (spectrum.density.front() *
                            std::cos(2.0 * spectrum.detuning_rad_per_ps.front() * t) +
                        spectrum.density.back() *
                            std::cos(2.0 * spectrum.detuning_rad_per_ps.back() * t));
    for (std::size_t i = 1; i + 1 < n; ++i) {
      acc += spectrum.density[i] * std::cos(2.0 * spectrum.detuning_rad_per_ps[i] * t);
    }
    return acc * spectrum.grid_step();
  };
  // half width at half depth, located by marching then bisection
  double hw = std::nan("");
  double t_hi = 1e-3;
  while (t_hi < 1e5 && g(t_hi) > 0.5) t_hi *= 2.0;
  if (t_hi < 1e5) {
    double lo = t_hi / 2.0, hi = t_hi;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) > 0.5 ? lo : hi) = mid;
    }
    hw = 0.5 * (lo + hi);
  }
  return DipKernel{std::move(g), hw, "spectrum"};
}

/// Fitted dip C(tau) = B [1 - V g((tau - center)/stretch)]. `visibility` uses
/// the (Rmax-Rmin)/(Rmax+Rmin) convention, equal to V/(2-V);
/// `visibility_peak_norm` is the alternative (Rmax-Rmin)/Rmax convention
/// (the raw fitted V). `width` is the half width at half depth in ps.
struct DipFit {
  double baseline = 0.0;
  double visibility = 0.0;
  double visibility_peak_norm = 0.0;
  double center = 0.0;
  double width = 0.0;
  double baseline_err = 0.0;
  double visibility_err = 0.0;
  double visibility_peak_norm_err = 0.0;
  double center_err = 0.0;
  double width_err = 0.0;
  double chi2 = 0.0;
  int ndf = 0;
  std::string kernel;
};

inline DipFit fit_hom_dip(std::span<const WeightedPoint> points, const DipKernel& kernel) {
  if (points.size() < 8) throw std::invalid_argument("fit_hom_dip: need at least 8 points");
  detail::require_positive_sigmas(points);

  std::vector<WeightedPoint> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.x < b.x; });

  // Baseline from the outer quarter of points on each wing.
  const std::size_t wing = std::max<std::size_t>(2, pts.size() / 4);
  double wsum = 0.0, bsum = 0.0;
  for (std::size_t i = 0; i < wing; ++i) {
    for (const auto& pt : {pts[i], pts[pts.size() - 1 - i]}) {
      const double w = 1.0 / (pt.sigma * pt.sigma);
      wsum += w;
      bsum += w * pt.y;
    }
  }
  const double b0 = bsum / wsum;

  std::size_t i_min = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].y < pts[i_min].y) i_min = i;
  }
  const double depth = b0 - pts[i_min].y;
  if (depth < 3.0 * pts[i_min].sigma) {
    throw fit_error("fit_hom_dip: no dip detected");
  }

  // Initial stretch from the half-depth crossings.
  const double half_level = b0 - depth / 2.0;
  double x_left = pts.front().x, x_right = pts.back().x;
  for (std::size_t i = i_min; i-- > 0;) {
    if (pts[i].y > half_level) {
      x_left = pts[i].x;
      break;
    }
  }
  for (std::size_t i = i_min + 1; i < pts.size(); ++i) {
    if (pts[i].y > half_level) {
      x_right = pts[i].x;
      break;
    }
  }
  double w0 = (x_right - x_left) / 2.0;
  if (std::isfinite(kernel.half_width) && kernel.half_width > 0.0) w0 /= kernel.half_width;
  if (!(w0 > 0.0)) w0 = (pts.back().x - pts.front().x) / 8.0;

  const auto& g = kernel.g;
  const auto model = [&g](double x, const Eigen::VectorXd& p) {
    return p[0] * (1.0 - p[1] * g((x - p[2]) / std::abs(p[3])));
  };

  detail::LmResult best;
  bool have_best = false;
  for (double scale : {1.0, 0.5, 2.0}) {
    Eigen::VectorXd p0(4);
    p0 << b0, std::clamp(depth / b0, 0.05, 1.0), pts[i_min].x, w0 * scale;
    detail::LmResult r = detail::levenberg_marquardt(model, pts, std::move(p0));
    if (!r.converged) continue;
    if (!have_best || r.chi2 < best.chi2) {
      best = std::move(r);
      have_best = true;
    }
  }
  if (!have_best) throw fit_error("fit_hom_dip: did not converge");

  const double v = best.params[1];
  const double sigma_v = std::sqrt(std::max(best.covariance(1, 1), 0.0));
  if (v < 3.0 * sigma_v) throw fit_error("fit_hom_dip: no dip detected");

  DipFit fitted;
  fitted.baseline = best.params[0];
  fitted.visibility_peak_norm = std::clamp(v, 0.0, 1.0);
  fitted.visibility = std::clamp(v / (2.0 - v), 0.0, 1.0);
  fitted.center = best.params[2];
  const double stretch = std::abs(best.params[3]);
  fitted.width = std::isfinite(kernel.half_width) ? stretch * kernel.half_width : stretch;
  fitted.baseline_err = std::sqrt(std::max(best.covariance(0, 0), 0.0));
  fitted.visibility_peak_norm_err = sigma_v;
  const double dratio = 2.0 / ((2.0 - v) * (2.0 - v));
  fitted.visibility_err = dratio * sigma_v;
  fitted.center_err = std::sqrt(std::max(best.covariance(2, 2), 0.0));
  const double stretch_err = std::sqrt(std::max(best.covariance(3, 3), 0.0));
  fitted.width_err = std::isfinite(kernel.half_width) ? stretch_err * kernel.half_width : stretch_err;
  fitted.chi2 = best.chi2;
  fitted.ndf = best.ndf;
  fitted.kernel = kernel.name;
  return fitted;
}

inline nlohmann::json fit_report(const FringeFit& f) {
  return nlohmann::json{
      {"model", "fringe"},
      {"params",
       {{"baseline", f.baseline},
        {"amplitude", f.amplitude},
        {"visibility", f.visibility},
        {"period", f.period},
        {"v_pi", f.v_pi()},
        {"u_offset", f.u_offset}}},
      {"errors",
       {{"baseline", f.baseline_err},
        {"amplitude", f.amplitude_err},
        {"visibility", f.visibility_err},
        {"period", f.period_err},
        {"v_pi", f.v_pi_err()},
        {"u_offset", f.u_offset_err}}},
      {"chi2", f.chi2},
      {"ndf", f.ndf},
      {"convention_flags",
       {{"visibility", "(Rmax-Rmin)/(Rmax+Rmin)"},
        {"u_offset_interval", "[-v_pi, v_pi)"},
        {"sigma_model", "sqrt(counts)"}}}};
}

inline nlohmann::json fit_report(const DipFit& f) {
  return nlohmann::json{
      {"model", "hom_dip"},
      {"params",
       {{"baseline", f.baseline},
        {"visibility", f.visibility},
        {"visibility_peak_norm", f.visibility_peak_norm},
        {"center", f.center},
        {"width", f.width}}},
      {"errors",
       {{"baseline", f.baseline_err},
        {"visibility", f.visibility_err},
        {"visibility_peak_norm", f.visibility_peak_norm_err},
        {"center", f.center_err},
        {"width", f.width_err}}},
      {"chi2", f.chi2},
      {"ndf", f.ndf},
      {"convention_flags",
       {{"visibility", "(Rmax-Rmin)/(Rmax+Rmin)"},
        {"alternative_visibility", "(Rmax-Rmin)/Rmax"},
        {"kernel", f.kernel},
        {"sigma_model", "sqrt(counts)"}}}};
}

}  // namespace lnchip::fit
