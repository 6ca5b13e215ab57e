// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Self-check suites behind `ftb verify`: numerical identities the library is
// supposed to satisfy, reported as named pass/fail checks with errors.
#pragma once

#include <string>
#include <vector>

#include "ftb/divergence.hpp"

namespace ftb {

struct CheckResult {
  std::string name;
  bool pass = false;
  double max_err = 0.0;
  double tolerance = 0.0;
};

// The seven named divergences plus alpha at {0, 0.5, 0.75, 1, 1.2, 2}.
const std::vector<DivergenceSpec>& full_spec_list();
// Everything with a strictly convex loss: the full list minus TotalVariation,
// with the alpha family represented at 0.75 and 1.2 (its other sampled values
// coincide with named divergences).
const std::vector<DivergenceSpec>& strictly_convex_spec_list();

// suite is one of: losses, devgrad, gradients, inverse, variance, all.
// Throws config_error for anything else.
std::vector<CheckResult> verify_suite(const std::string& suite);

// {"suite": ..., "checks": [{"name", "pass", "max_err", "tolerance"}, ...]}
std::string report_json(const std::string& suite, const std::vector<CheckResult>& checks);

}  // namespace ftb
