// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Loss family implementation.

#include "ftb/loss.hpp"

#include <cmath>

#include "ftb/num.hpp"

namespace ftb {

namespace {

void check_delta(double d, const char* where) {
  if (!std::isfinite(d)) {
    throw domain_error(std::string(where) + ": delta must be finite");
  }
}

double sgn0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Jensen-Shannon loss derivative 2 log(2 e^d / (e^d + 1)) = 2(log 2 - softplus(-d)).
double jsd_loss_deriv(double d) { return 2.0 * (std::log(2.0) - num::softplus(-d)); }

}  // namespace

double loss_eval(const DivergenceSpec& spec_in, double delta) {
  check_delta(delta, "loss_eval");
  const DivergenceSpec spec = canonicalize(spec_in);
  switch (spec.kind) {
    case Divergence::reverse_kl:
      return 0.5 * delta * delta;
    case Divergence::forward_kl:
      return delta + num::checked_expm1(-delta, "loss_eval(forward_kl)");
    case Divergence::pearson:
      return num::checked_expm1(delta, "loss_eval(pearson)") - delta;
    case Divergence::neyman:
      return 0.5 * delta + 0.25 * num::checked_expm1(-2.0 * delta, "loss_eval(neyman)");
    case Divergence::hellinger:
      return 2.0 * delta + 4.0 * num::checked_expm1(-0.5 * delta, "loss_eval(hellinger)");
    case Divergence::tv:
      return std::fabs(delta);
    case Divergence::jsd:
      // No elementary antiderivative; integrate the derivative.
      num::check_exp_arg(delta, "loss_eval(jsd)");
      return num::integrate(jsd_loss_deriv, 0.0, delta, 1e-11);
    case Divergence::alpha: {
      const double s = spec.alpha - 1.0;
      const double x = s * delta;
      num::check_exp_arg(x, "loss_eval(alpha)");
      if (std::fabs(x) < 1e-5) {
        // (expm1(x) - x)/s^2 loses all digits near 0; use the series
        // d^2 (1/2 + x/6 + x^2/24 + ...) instead.
        return delta * delta * (0.5 + x * (1.0 / 6.0 + x / 24.0));
      }
      return (std::expm1(x) - x) / (s * s);
    }
  }
  throw config_error("loss_eval: invalid kind");
}

double loss_deriv(const DivergenceSpec& spec_in, double delta) {
  check_delta(delta, "loss_deriv");
  const DivergenceSpec spec = canonicalize(spec_in);
  switch (spec.kind) {
    case Divergence::reverse_kl:
      return delta;
    case Divergence::forward_kl:
      return -num::checked_expm1(-delta, "loss_deriv(forward_kl)");
    case Divergence::pearson:
      return num::checked_expm1(delta, "loss_deriv(pearson)");
    case Divergence::neyman:
      return -0.5 * num::checked_expm1(-2.0 * delta, "loss_deriv(neyman)");
    case Divergence::hellinger:
      return -2.0 * num::checked_expm1(-0.5 * delta, "loss_deriv(hellinger)");
    case Divergence::tv:
      return sgn0(delta);
    case Divergence::jsd:
      num::check_exp_arg(delta, "loss_deriv(jsd)");
      return jsd_loss_deriv(delta);
    case Divergence::alpha:
      return num::expm1_over(spec.alpha - 1.0, delta, "loss_deriv(alpha)");
  }
  throw config_error("loss_deriv: invalid kind");
}

double loss_second_deriv(const DivergenceSpec& spec_in, double delta) {
  check_delta(delta, "loss_second_deriv");
  const DivergenceSpec spec = canonicalize(spec_in);
  switch (spec.kind) {
    case Divergence::reverse_kl:
      return 1.0;
    case Divergence::forward_kl:
      return num::checked_exp(-delta, "loss_second_deriv(forward_kl)");
    case Divergence::pearson:
      return num::checked_exp(delta, "loss_second_deriv(pearson)");
    case Divergence::neyman:
      return num::checked_exp(-2.0 * delta, "loss_second_deriv(neyman)");
    case Divergence::hellinger:
      return num::checked_exp(-0.5 * delta, "loss_second_deriv(hellinger)");
    case Divergence::tv:
      return 0.0;
    case Divergence::jsd:
      num::check_exp_arg(delta, "loss_second_deriv(jsd)");
      return 2.0 * num::sigmoid(-delta);
    case Divergence::alpha:
      return num::checked_exp((spec.alpha - 1.0) * delta, "loss_second_deriv(alpha)");
  }
  throw config_error("loss_second_deriv: invalid kind");
}

double loss_numeric(const DivergenceSpec& spec_in, double delta) {
  check_delta(delta, "loss_numeric");
  const DivergenceSpec spec = canonicalize(spec_in);
  if (spec.kind == Divergence::tv) {
    // The generator derivative at e^t is sgn(e^t - 1) = sgn(t); the symmetric
    // subgradient contributes nothing at the single point t = 0.
    return num::integrate([](double t) { return sgn0(t); }, 0.0, delta, 1e-10);
  }
  num::check_exp_arg(delta, "loss_numeric");
  const double f1_at_1 = generator_eval(spec, 1.0).f1;
  return num::integrate(
      [&spec, f1_at_1](double t) {
        return generator_eval(spec, std::exp(t)).f1 - f1_at_1;
      },
      0.0, delta, 1e-10);
}

double tempered_loss_eval(const DivergenceSpec& spec, double delta, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw domain_error("tempered_loss_eval: beta must be finite and positive");
  }
  check_delta(delta, "tempered_loss_eval");
  return loss_eval(spec, beta * delta) / beta;
}

double inverse_generator(const std::function<double(double)>& loss_deriv_fn, double u) {
  if (!std::isfinite(u) || u <= 0.0) {
    throw domain_error("inverse_generator: u must be finite and positive");
  }
  const double d1_at_0 = loss_deriv_fn(0.0);
  constexpr double h = 1e-5;
  const double d2_at_0 = (loss_deriv_fn(h) - loss_deriv_fn(-h)) / (2.0 * h);
  if (!(d2_at_0 > 0.0) || !std::isfinite(d2_at_0)) {
    throw domain_error("inverse_generator: loss is not strictly convex at 0 (l''(0) <= 0)");
  }
  const double lambda1 = 1.0 / d2_at_0;
  const double lambda2 = 1.0 - d1_at_0 / d2_at_0;
  const double integral = num::integrate(
      [&loss_deriv_fn](double t) { return loss_deriv_fn(std::log(t)); }, 1.0, u, 1e-10);
  return lambda1 * integral + lambda2 * (u - 1.0);
}

}  // namespace ftb
