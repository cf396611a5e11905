// Copyright 2026 The lnchip Authors
// SPDX-License-Identifier: Apache-2.0
//
// Seeded generators for randomized property tests.

#pragma once

#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "lnchip/fock_state.hpp"

namespace lnchip::testing {

inline Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd g(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) g(i, j) = std::complex<double>(gauss(rng), gauss(rng));
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
}

/// Random normalized state over all patterns with total photons <= max_total.
inline fock::StateVector random_state(int modes, int max_total, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::vector<int>> patterns;
  std::vector<int> scratch(modes, 0);
  // enumerate all occupations with total in [1, max_total]
  auto rec = [&](auto&& self, int mode, int remaining) -> void {
    if (mode == modes - 1) {
      scratch[mode] = remaining;
      if (remaining >= 0) patterns.push_back(scratch);
      return;
    }
    for (int n = 0; n <= remaining; ++n) {
      scratch[mode] = n;
      self(self, mode + 1, remaining - n);
    }
  };
  for (int total = 1; total <= max_total; ++total) rec(rec, 0, total);

  std::vector<fock::Term> terms;
  for (const auto& occ : patterns) {
    terms.push_back(fock::Term{fock::FockPattern{occ},
                               std::complex<double>(gauss(rng), gauss(rng))});
  }
  return fock::StateVector(modes, std::move(terms));
}

}  // namespace lnchip::testing
