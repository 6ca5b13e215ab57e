// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Surrogate losses over log-ratio deviations: L_f(d) = int_0^d (f'(e^t) - f'(1)) dt.
// Each L_f is convex, translation-friendly, and minimized exactly at d = 0.
#pragma once

#include <functional>

#include "ftb/divergence.hpp"

namespace ftb {

// Closed-form loss value. The Jensen-Shannon loss has no elementary
// antiderivative and is evaluated by adaptive quadrature of its derivative.
double loss_eval(const DivergenceSpec& spec, double delta);

// dL/dd = f'(e^d) - f'(1). TotalVariation uses the symmetric subgradient:
// sgn(d) with value 0 at d = 0, so that L(d) = |d| is minimized at 0.
double loss_deriv(const DivergenceSpec& spec, double delta);

// d^2L/dd^2 = f''(e^d) e^d (0 for TotalVariation away from the kink).
double loss_second_deriv(const DivergenceSpec& spec, double delta);

// Quadrature oracle: integrates the defining integrand directly from the
// generator catalog (absolute tolerance 1e-10). Every closed form above is
// tested against this.
double loss_numeric(const DivergenceSpec& spec, double delta);

// (1/beta) L_f(beta * d) for inverse temperature beta > 0.
double tempered_loss_eval(const DivergenceSpec& spec, double delta, double beta);

// Reconstructs the standardized generator whose surrogate loss has the given
// derivative: f_l(u) = lambda1 * int_1^u l'(log t) dt + lambda2 * (u - 1) with
// lambda1 = 1/l''(0) and lambda2 = 1 - l'(0)/l''(0) (l''(0) by central
// difference, step 1e-5). Requires l''(0) > 0, i.e. a strictly convex loss.
double inverse_generator(const std::function<double(double)>& loss_deriv_fn, double u);

}  // namespace ftb
