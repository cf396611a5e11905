// Copyright 2026 The lnchip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace lnchip {

/// Raised when a configuration document cannot be parsed or violates the
/// schema (missing/unknown fields, out-of-range values). CLI exit code 2.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a least-squares fit does not converge or the data cannot
/// constrain the model (degenerate fringe, no dip). CLI exit code 3.
class fit_error : public std::runtime_error {
 public:
  explicit fit_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lnchip
