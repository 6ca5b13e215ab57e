// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Catalog of f-divergence generators, standardized so that f(1) = 0, f'(1) = 1,
// f''(1) = 1, plus the matching backward generators h(u) = int_1^u (2 - f'(1/t)) dt.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ftb/error.hpp"

namespace ftb {

enum class Divergence {
  reverse_kl,
  forward_kl,
  pearson,
  neyman,
  hellinger,
  tv,
  jsd,
  alpha,
};

struct DivergenceSpec {
  Divergence kind = Divergence::reverse_kl;
  double alpha = 1.0;  // only meaningful when kind == Divergence::alpha

  static DivergenceSpec named(Divergence kind);
  static DivergenceSpec alpha_family(double alpha);
};

// Maps Alpha specs near the family's singular points onto the equivalent named
// divergence: |alpha - 1| < 1e-4 -> ReverseKL, |alpha| < 1e-4 -> ForwardKL.
// Other specs pass through unchanged.
DivergenceSpec canonicalize(const DivergenceSpec& spec);

// Token forms: "reverse_kl", ..., "alpha" (alpha value supplied separately) or
// the inline form "alpha:VALUE". Throws config_error on unknown names, a
// missing alpha value, or a non-finite alpha.
DivergenceSpec parse_divergence(std::string_view token,
                                std::optional<double> alpha = std::nullopt);
std::string divergence_name(const DivergenceSpec& spec);

// The seven named divergences (no Alpha representative).
const std::vector<DivergenceSpec>& named_catalog();

struct GeneratorValue {
  double f;   // f(u)
  double f1;  // f'(u)
  double f2;  // f''(u)
};

// Standardized generator and its first two derivatives at u > 0.
// TotalVariation uses the subgradient convention f'(1) = 1 and reports f'' = 0
// (the kink at u = 1 has no second derivative; 0 is the value elsewhere).
GeneratorValue generator_eval(const DivergenceSpec& spec, double u);

struct BackwardGeneratorValue {
  double h;   // h(u)
  double h1;  // h'(u) = 2 - f'(1/u)
};

BackwardGeneratorValue backward_generator_eval(const DivergenceSpec& spec, double u);

// g''(u)/C for the on-policy backward objective's integral representation:
// f'(u)/u + f''(u). Its sign decides convexity of that objective in pi_B.
double onpolicy_backward_g2(const DivergenceSpec& spec, double u);

}  // namespace ftb
