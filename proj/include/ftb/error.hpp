// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Error taxonomy for the ftb core library.
#pragma once

#include <stdexcept>
#include <string>

namespace ftb {

// Base class for every error raised by the library.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid mathematical input (u <= 0, non-finite delta, illegal trajectory, ...).
struct domain_error : error {
  using error::error;
};

// An exponent argument left the safe range; carries the offending value.
struct overflow_error : error {
  double offending_value;
  overflow_error(const std::string& what, double value)
      : error(what), offending_value(value) {}
};

// A numeric routine failed to meet its tolerance; carries the residual.
struct numeric_error : error {
  double residual;
  numeric_error(const std::string& what, double res) : error(what), residual(res) {}
};

// Bad user-facing configuration (unknown divergence name, missing key, ...).
struct config_error : error {
  using error::error;
};

}  // namespace ftb
