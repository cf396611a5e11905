// Copyright 2026 The lnchip Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

namespace lnchip {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Bumped whenever a CSV or JSON output schema changes shape.
inline constexpr int kOutputSchemaVersion = 1;

}  // namespace lnchip
