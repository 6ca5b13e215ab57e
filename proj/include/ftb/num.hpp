// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Numeric building blocks: guarded exponentials, log-mean-exp, adaptive
// Gauss-Kronrod quadrature, golden-section minimization, bracketed root finding.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "ftb/error.hpp"

namespace ftb::num {

// Exponent arguments beyond this magnitude are treated as overflow rather than
// silently clamped; exp(709.78) is the double limit, 700 leaves headroom.
inline constexpr double kMaxExpArg = 700.0;

inline void check_exp_arg(double x, const char* where) {
  if (!(std::fabs(x) <= kMaxExpArg)) {
    throw overflow_error(std::string(where) + ": exponent argument " +
                             std::to_string(x) + " exceeds safe range",
                         x);
  }
}

inline double checked_exp(double x, const char* where) {
  check_exp_arg(x, where);
  return std::exp(x);
}

inline double checked_expm1(double x, const char* where) {
  check_exp_arg(x, where);
  return std::expm1(x);
}

// expm1(s*x)/s with the s -> 0 limit handled exactly.
inline double expm1_over(double s, double x, const char* where) {
  if (s == 0.0) return x;
  check_exp_arg(s * x, where);
  return std::expm1(s * x) / s;
}

// log(1 + e^x), stable for both tails.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// 1 / (1 + e^-x), stable for both tails.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log((1/n) sum e^{x_i}) with max shift; exact on constant batches.
double log_mean_exp(std::span<const double> xs);

// Compensated (Kahan) accumulator.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

// Integral of g over [a, b] to absolute tolerance abs_tol using globally
// adaptive Gauss-Kronrod 7-15 with worst-interval-first refinement. Throws
// numeric_error (carrying the residual) if the tolerance cannot be met.
double integrate(const std::function<double(double)>& g, double a, double b,
                 double abs_tol);

// Minimizer of a unimodal g on [a, b] by golden-section search to x-tolerance.
double golden_section_minimize(const std::function<double(double)>& g, double a,
                               double b, double x_tol);

struct RootResult {
  double x;
  double residual;
};

// Root of a strictly monotone g on a bracketing [lo, hi]: bisection to a tight
// interval, then a few Newton polish steps using g1. Throws numeric_error if
// the final |g(x)| exceeds tol_residual.
RootResult bisect_newton(const std::function<double(double)>& g,
                         const std::function<double(double)>& g1, double lo,
                         double hi, double tol_residual);

}  // namespace ftb::num
