// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Deviation-gradient batch objective: estimate the log-normalizer as the batch
// loss minimizer, then weight each sample by the loss derivative at the
// centered deviation. Weights always sum to zero.
#pragma once

#include <span>
#include <vector>

#include "ftb/divergence.hpp"

namespace ftb {

// log Z_hat = argmin_C (1/B) sum_i L_f(delta_i + C), by closed form per
// divergence (TotalVariation: minus the batch median, even sizes tie-broken at
// the midpoint; Jensen-Shannon: bracketed root of the optimality condition,
// residual <= 1e-10). Requires a non-empty batch of finite deviations.
double estimate_log_z(const DivergenceSpec& spec, std::span<const double> deltas);

// w_i = L_f'(delta_i + log Z_hat); sum_i w_i = 0 up to roundoff.
std::vector<double> gradient_weights(const DivergenceSpec& spec,
                                     std::span<const double> deltas);

struct DevGradResult {
  double log_z_hat = 0.0;
  double loss = 0.0;  // (1/B) sum_i L_f(delta_i + log Z_hat)
  std::vector<double> weights;
};

// The full batch objective at the estimated normalizer. The normalizer is a
// plug-in constant: gradients flow only through the weights.
DevGradResult devgrad_batch_loss(const DivergenceSpec& spec,
                                 std::span<const double> deltas);

}  // namespace ftb
