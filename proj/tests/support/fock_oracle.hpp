// Copyright 2026 The lnchip Authors
// SPDX-License-Identifier: Apache-2.0
//
// Test-only reference implementation of the linear-optical mode transform.
// Structurally independent of fock::apply_mode_transform: instead of
// expanding the substituted creation-operator polynomial photon by photon,
// it enumerates every output pattern with the right photon number and
// evaluates the transition amplitude through a matrix permanent,
//   <m| U(M) |n> = per(M[m, n]) / sqrt(prod m_j! prod n_i!),
// where M[m, n] repeats row j m_j times and column i n_i times.

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "lnchip/fock_state.hpp"

namespace lnchip::testing {

inline std::complex<double> permanent(const Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  if (n == 0) return {1.0, 0.0};
  // Laplace-style expansion over the first row with explicit column masks.
  std::vector<int> cols(n);
  for (int i = 0; i < n; ++i) cols[i] = i;
  struct Rec {
    const Eigen::MatrixXcd& m;
    std::complex<double> run(int row, std::vector<int>& remaining) const {
      if (remaining.empty()) return {1.0, 0.0};
      std::complex<double> sum{0.0, 0.0};
      for (std::size_t k = 0; k < remaining.size(); ++k) {
        const int col = remaining[k];
        remaining.erase(remaining.begin() + k);
        sum += m(row, col) * run(row + 1, remaining);
        remaining.insert(remaining.begin() + k, col);
      }
      return sum;
    }
  };
  return Rec{a}.run(0, cols);
}

inline void enumerate_patterns(int modes, int total, std::vector<int>& current,
                               std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == modes - 1) {
    current.push_back(total);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int n = 0; n <= total; ++n) {
    current.push_back(n);
    enumerate_patterns(modes, total - n, current, out);
    current.pop_back();
  }
}

/// Same contract as fock::apply_mode_transform, computed via permanents.
inline fock::StateVector brute_force_transform(const fock::StateVector& state,
                                               const fock::ModeTransform& transform) {
  const int k = state.modes();
  if (transform.modes() != k) {
    throw std::invalid_argument("brute_force_transform: dimension mismatch");
  }
  std::map<std::vector<int>, std::complex<double>> out;
  for (const auto& term : state.terms()) {
    const int total = term.pattern.total();
    std::vector<std::vector<int>> patterns;
    std::vector<int> scratch;
    enumerate_patterns(k, total, scratch, patterns);
    const double n_fact = fock::detail::sqrt_occupation_factorial(term.pattern.occ);
    for (const auto& m_occ : patterns) {
      Eigen::MatrixXcd sub(total, total);
      int row = 0;
      for (int j = 0; j < k; ++j) {
        for (int rep = 0; rep < m_occ[j]; ++rep, ++row) {
          int col = 0;
          for (int i = 0; i < k; ++i) {
            for (int rep2 = 0; rep2 < term.pattern.occ[i]; ++rep2, ++col) {
              sub(row, col) = transform.matrix(j, i);
            }
          }
        }
      }
      const double m_fact = fock::detail::sqrt_occupation_factorial(m_occ);
      const std::complex<double> amp = term.amplitude * permanent(sub) / (n_fact * m_fact);
      if (amp != std::complex<double>{0.0, 0.0}) out[m_occ] += amp;
    }
  }
  double norm_sq = 0.0;
  std::vector<fock::Term> terms;
  for (auto& [occ, amp] : out) {
    norm_sq += std::norm(amp);
    terms.push_back(fock::Term{fock::FockPattern{occ}, amp});
  }
  if (norm_sq <= 1e-300) {
    throw std::domain_error("brute_force_transform: state fully extinguished");
  }
  double success = state.success_probability();
  if (transform.kind == fock::ModeTransform::Kind::subunitary) {
    success *= std::min(norm_sq, 1.0);
  }
  return fock::StateVector(k, std::move(terms), success, state.photon_cutoff());
}

/// Largest amplitude difference between two states over the union of their
/// patterns (they must agree on mode count).
inline double max_amplitude_deviation(const fock::StateVector& a, const fock::StateVector& b) {
  double dev = 0.0;
  for (const auto& t : a.terms()) dev = std::max(dev, std::abs(t.amplitude - b.amplitude(t.pattern)));
  for (const auto& t : b.terms()) dev = std::max(dev, std::abs(t.amplitude - a.amplitude(t.pattern)));
  return dev;
}

}  // namespace lnchip::testing
