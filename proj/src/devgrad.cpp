// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Closed-form log-normalizer estimates and deviation-gradient weights.

#include "ftb/devgrad.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ftb/loss.hpp"
#include "ftb/num.hpp"

namespace ftb {

namespace {

void check_batch(std::span<const double> deltas, const char* where) {
  if (deltas.empty()) throw domain_error(std::string(where) + ": empty batch");
  for (double d : deltas) {
    if (!std::isfinite(d)) {
      throw domain_error(std::string(where) + ": non-finite deviation in batch");
    }
  }
}

// log((1/B) sum e^{s * d_i}) / s patterns cover every exponential-family case.
double scaled_lme(std::span<const double> deltas, double s) {
  std::vector<double> xs(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    num::check_exp_arg(s * deltas[i], "estimate_log_z");
    xs[i] = s * deltas[i];
  }
  return num::log_mean_exp(xs);
}

double median(std::span<const double> deltas) {
  std::vector<double> xs(deltas.begin(), deltas.end());
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  if (n % 2 == 1) return xs[n / 2];
  return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Jensen-Shannon optimality condition: mean_i softplus(-(d_i + C)) = log 2,
// strictly decreasing in C, so any bracket with opposite signs pins the root.
double jsd_log_z(std::span<const double> deltas) {
  double lo = deltas[0];
  double hi = deltas[0];
  for (double d : deltas) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  // The minimizer lies in [-max, -min]; pad so the bracket straddles strictly.
  const double a = -hi - 40.0;
  const double b = -lo + 40.0;
  const auto g = [deltas](double c) {
    num::KahanSum acc;
    for (double d : deltas) acc.add(num::softplus(-(d + c)));
    return acc.value() / static_cast<double>(deltas.size()) - std::log(2.0);
  };
  const auto g1 = [deltas](double c) {
    num::KahanSum acc;
    for (double d : deltas) acc.add(-num::sigmoid(-(d + c)));
    return acc.value() / static_cast<double>(deltas.size());
  };
  return num::bisect_newton(g, g1, a, b, 1e-10).x;
}

}  // namespace

double estimate_log_z(const DivergenceSpec& spec_in, std::span<const double> deltas) {
  check_batch(deltas, "estimate_log_z");
  const DivergenceSpec spec = canonicalize(spec_in);
  switch (spec.kind) {
    case Divergence::reverse_kl: {
      num::KahanSum acc;
      for (double d : deltas) acc.add(d);
      return -acc.value() / static_cast<double>(deltas.size());
    }
    case Divergence::forward_kl:
      return scaled_lme(deltas, -1.0);
    case Divergence::pearson:
      return -scaled_lme(deltas, 1.0);
    case Divergence::neyman:
      return 0.5 * scaled_lme(deltas, -2.0);
    case Divergence::hellinger:
      return 2.0 * scaled_lme(deltas, -0.5);
    case Divergence::tv:
      return -median(deltas);
    case Divergence::jsd:
      return jsd_log_z(deltas);
    case Divergence::alpha: {
      const double s = spec.alpha - 1.0;
      return -scaled_lme(deltas, s) / s;
    }
  }
  throw config_error("estimate_log_z: invalid kind");
}

std::vector<double> gradient_weights(const DivergenceSpec& spec,
                                     std::span<const double> deltas) {
  check_batch(deltas, "gradient_weights");
  const double log_z = estimate_log_z(spec, deltas);
  std::vector<double> w(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    w[i] = loss_deriv(spec, deltas[i] + log_z);
  }
  return w;
}

DevGradResult devgrad_batch_loss(const DivergenceSpec& spec,
                                 std::span<const double> deltas) {
  check_batch(deltas, "devgrad_batch_loss");
  DevGradResult out;
  out.log_z_hat = estimate_log_z(spec, deltas);
  out.weights.resize(deltas.size());
  num::KahanSum acc;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double centered = deltas[i] + out.log_z_hat;
    acc.add(loss_eval(spec, centered));
    out.weights[i] = loss_deriv(spec, centered);
  }
  out.loss = acc.value() / static_cast<double>(deltas.size());
  return out;
}

}  // namespace ftb
