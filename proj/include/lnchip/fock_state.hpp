// Copyright 2026 The lnchip Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exact few-photon Fock-space states on a handful of optical modes, and the
// linear-optical transformations the chip applies to them. States are
// immutable values and every operation is a pure function, so everything here
// is safe to share across threads.
//
// Convention: a beamsplitter/directional coupler with power cross-coupling T
// has the symmetric matrix [[t, i r], [i r, t]] with t = sqrt(1-T),
// r = sqrt(T); the cross path picks up the factor i. Under this convention
// (|2,0> + e^{i a}|0,2>)/sqrt(2) through a 50:50 coupler comes out as
// cos(a/2)|1,1> - sin(a/2)(|2,0>-|0,2>)/sqrt(2) up to a global phase, i.e.
// the bunched branch enters with -sin(a/2).

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace lnchip::fock {

using Complex = std::complex<double>;

/// Hard ceiling on total photon number; the chip works in the single-pair
/// regime, multi-pair statistics are handled at the counting level.
inline constexpr int kDefaultPhotonCutoff = 4;

/// Occupation-number pattern, one entry per mode.
struct FockPattern {
  std::vector<int> occ;

  int modes() const { return static_cast<int>(occ.size()); }
  int total() const { return std::accumulate(occ.begin(), occ.end(), 0); }

  friend auto operator<=>(const FockPattern&, const FockPattern&) = default;
};

inline FockPattern pattern(std::initializer_list<int> occ) { return FockPattern{occ}; }

namespace detail {

inline double sqrt_occupation_factorial(const std::vector<int>& occ) {
  double p = 1.0;
  for (int n : occ) {
    for (int k = 2; k <= n; ++k) p *= k;
  }
  return std::sqrt(p);
}

}  // namespace detail

struct Term {
  FockPattern pattern;
  Complex amplitude;
};

/// Normalized superposition of Fock patterns sharing one mode count.
/// success_probability tracks the norm lost to modeled loss/post-selection;
/// amplitudes always describe the state conditioned on success.
class StateVector {
 public:
  StateVector(int modes, std::vector<Term> terms, double success_probability = 1.0,
              int photon_cutoff = kDefaultPhotonCutoff)
      : modes_(modes), cutoff_(photon_cutoff) {
    if (modes_ < 1) throw std::invalid_argument("StateVector: need at least one mode");
    if (cutoff_ < 1) throw std::invalid_argument("StateVector: photon cutoff must be positive");
    if (success_probability < -1e-12 || success_probability > 1.0 + 1e-12) {
      throw std::invalid_argument("StateVector: success probability outside [0,1]");
    }
    success_probability_ = std::clamp(success_probability, 0.0, 1.0);

    std::map<std::vector<int>, Complex> merged;
    for (auto& t : terms) {
      if (t.pattern.modes() != modes_) {
        throw std::invalid_argument("StateVector: term mode count mismatch");
      }
      for (int n : t.pattern.occ) {
        if (n < 0) throw std::invalid_argument("StateVector: negative occupation");
      }
      if (t.pattern.total() > cutoff_) {
        throw std::invalid_argument("StateVector: term exceeds photon cutoff");
      }
      merged[t.pattern.occ] += t.amplitude;
    }
    double norm_sq = 0.0;
    for (auto& [occ, amp] : merged) norm_sq += std::norm(amp);
    if (norm_sq <= 0.0) throw std::invalid_argument("StateVector: zero norm");
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    terms_.reserve(merged.size());
    for (auto& [occ, amp] : merged) {
      if (amp == Complex{0.0, 0.0}) continue;
      terms_.push_back(Term{FockPattern{occ}, amp * inv_norm});
    }
    if (terms_.empty()) throw std::invalid_argument("StateVector: zero norm");
  }

  /// Single basis ket |n_1,...,n_k>.
  static StateVector basis_state(FockPattern p, int photon_cutoff = kDefaultPhotonCutoff) {
    const int m = p.modes();
    return StateVector(m, {Term{std::move(p), Complex{1.0, 0.0}}}, 1.0, photon_cutoff);
  }

  int modes() const { return modes_; }
  int photon_cutoff() const { return cutoff_; }
  double success_probability() const { return success_probability_; }
  /// Terms in lexicographic occupation order (fixed, serialization-stable).
  const std::vector<Term>& terms() const { return terms_; }

  Complex amplitude(const FockPattern& p) const {
    if (p.modes() != modes_) throw std::invalid_argument("amplitude: mode count mismatch");
    auto it = std::lower_bound(terms_.begin(), terms_.end(), p,
                               [](const Term& t, const FockPattern& q) { return t.pattern < q; });
    if (it != terms_.end() && it->pattern == p) return it->amplitude;
    return Complex{0.0, 0.0};
  }

 private:
  int modes_;
  int cutoff_;
  std::vector<Term> terms_;  // sorted, amplitudes normalized
  double success_probability_ = 1.0;
};

/// Linear mode map: creation operators transform as a+_i -> sum_j M_ji a+_j.
struct ModeTransform {
  enum class Kind { unitary, subunitary };

  Eigen::MatrixXcd matrix;
  Kind kind;

  int modes() const { return static_cast<int>(matrix.rows()); }

  static ModeTransform unitary(Eigen::MatrixXcd m) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      throw std::invalid_argument("ModeTransform: matrix must be square");
    }
    const Eigen::MatrixXcd gram = m.adjoint() * m;
    const double dev =
        (gram - Eigen::MatrixXcd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
    if (dev > 1e-12) {
      throw std::invalid_argument("ModeTransform: matrix is not unitary (deviation " +
                                  std::to_string(dev) + ")");
    }
    return ModeTransform{std::move(m), Kind::unitary};
  }

  static ModeTransform subunitary(Eigen::MatrixXcd m) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      throw std::invalid_argument("ModeTransform: matrix must be square");
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    if (svd.singularValues().maxCoeff() > 1.0 + 1e-12) {
      throw std::invalid_argument("ModeTransform: singular value exceeds 1, not a loss map");
    }
    return ModeTransform{std::move(m), Kind::subunitary};
  }

  static ModeTransform identity(int modes) {
    return ModeTransform{Eigen::MatrixXcd::Identity(modes, modes), Kind::unitary};
  }
};

/// 2x2 coupler with power cross-coupling ratio in [0,1]; cross picks phase i.
inline ModeTransform beamsplitter(double cross_power_ratio) {
  if (cross_power_ratio < 0.0 || cross_power_ratio > 1.0) {
    throw std::invalid_argument("beamsplitter: cross ratio outside [0,1]");
  }
  const double t = std::sqrt(1.0 - cross_power_ratio);
  const double r = std::sqrt(cross_power_ratio);
  Eigen::MatrixXcd m(2, 2);
  m << Complex{t, 0.0}, Complex{0.0, r}, Complex{0.0, r}, Complex{t, 0.0};
  return ModeTransform::unitary(std::move(m));
}

/// Diagonal photon loss, one power transmission per mode.
inline ModeTransform mode_loss(const std::vector<double>& power_transmissions) {
  const int k = static_cast<int>(power_transmissions.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    const double eta = power_transmissions[i];
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("mode_loss: transmission outside [0,1]");
    m(i, i) = std::sqrt(eta);
  }
  return ModeTransform::subunitary(std::move(m));
}

inline ModeTransform uniform_loss(int modes, double power_transmission) {
  return mode_loss(std::vector<double>(modes, power_transmission));
}

/// Applies the mode map by expanding the substituted creation-operator
/// polynomial photon by photon. Unitary maps preserve the norm exactly;
/// subunitary maps renormalize and fold the lost norm^2 into
/// success_probability (equivalent to vacuum-ancilla loss followed by
/// post-selection on all photons surviving).
inline StateVector apply_mode_transform(const StateVector& state, const ModeTransform& transform) {
  const int k = state.modes();
  if (transform.modes() != k) {
    throw std::invalid_argument("apply_mode_transform: dimension mismatch");
  }
  std::map<std::vector<int>, Complex> out;
  for (const Term& term : state.terms()) {
    std::map<std::vector<int>, Complex> poly;
    poly[std::vector<int>(k, 0)] =
        term.amplitude / detail::sqrt_occupation_factorial(term.pattern.occ);
    for (int i = 0; i < k; ++i) {
      for (int photon = 0; photon < term.pattern.occ[i]; ++photon) {
        std::map<std::vector<int>, Complex> next;
        for (const auto& [mono, coeff] : poly) {
          for (int j = 0; j < k; ++j) {
            const Complex mji = transform.matrix(j, i);
            if (mji == Complex{0.0, 0.0}) continue;
            std::vector<int> grown = mono;
            ++grown[j];
            next[grown] += coeff * mji;
          }
        }
        poly = std::move(next);
      }
    }
    for (const auto& [mono, coeff] : poly) {
      out[mono] += coeff * detail::sqrt_occupation_factorial(mono);
    }
  }

  double norm_sq = 0.0;
  std::vector<Term> terms;
  terms.reserve(out.size());
  for (auto& [occ, amp] : out) {
    const int total = std::accumulate(occ.begin(), occ.end(), 0);
    if (total > state.photon_cutoff()) {
      throw std::logic_error("apply_mode_transform: photon number grew past cutoff");
    }
    norm_sq += std::norm(amp);
    terms.push_back(Term{FockPattern{occ}, amp});
  }
  if (norm_sq <= 1e-300) {
    throw std::domain_error("apply_mode_transform: state fully extinguished by loss");
  }
  double success = state.success_probability();
  if (transform.kind == ModeTransform::Kind::subunitary) {
    success *= std::min(norm_sq, 1.0);
  }
  return StateVector(k, std::move(terms), success, state.photon_cutoff());
}

/// Multiplies each amplitude by e^{i n phase}, n the occupation of `mode`.
inline StateVector apply_phase(const StateVector& state, int mode, double phase_rad) {
  if (mode < 0 || mode >= state.modes()) {
    throw std::invalid_argument("apply_phase: invalid mode index");
  }
  std::vector<Term> terms = state.terms();
  for (Term& t : terms) {
    const int n = t.pattern.occ[mode];
    if (n != 0) t.amplitude *= std::exp(Complex{0.0, n * phase_rad});
  }
  return StateVector(state.modes(), std::move(terms), state.success_probability(),
                     state.photon_cutoff());
}

/// Born probability of one pattern, conditioned on post-selection success.
inline double pattern_probability(const StateVector& state, const FockPattern& p) {
  return std::norm(state.amplitude(p));
}

/// As pattern_probability but folded with the state's success probability,
/// i.e. the probability per generated pair of actually seeing the pattern.
inline double unconditional_pattern_probability(const StateVector& state, const FockPattern& p) {
  return pattern_probability(state, p) * state.success_probability();
}

// JSON form: {"modes": k, "terms": [{"occ": [...], "re": x, "im": y}], "success_p": p}
inline nlohmann::json to_json(const StateVector& state) {
  nlohmann::json terms = nlohmann::json::array();
  for (const Term& t : state.terms()) {
    terms.push_back({{"occ", t.pattern.occ}, {"re", t.amplitude.real()}, {"im", t.amplitude.imag()}});
  }
  return nlohmann::json{
      {"modes", state.modes()}, {"terms", std::move(terms)}, {"success_p", state.success_probability()}};
}

inline StateVector state_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("modes") || !j.contains("terms") || !j.contains("success_p")) {
    throw std::invalid_argument("state_from_json: expected {modes, terms, success_p}");
  }
  const int modes = j.at("modes").get<int>();
  std::vector<Term> terms;
  for (const auto& jt : j.at("terms")) {
    terms.push_back(Term{FockPattern{jt.at("occ").get<std::vector<int>>()},
                         Complex{jt.at("re").get<double>(), jt.at("im").get<double>()}});
  }
  return StateVector(modes, std::move(terms), j.at("success_p").get<double>());
}

}  // namespace lnchip::fock
