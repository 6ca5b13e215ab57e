// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Implementation of quadrature, minimization, and root finding.

#include "ftb/num.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace ftb::num {

double log_mean_exp(std::span<const double> xs) {
  if (xs.empty()) throw domain_error("log_mean_exp: empty input");
  double m = xs[0];
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) throw domain_error("log_mean_exp: non-finite input");
  KahanSum acc;
  for (double x : xs) acc.add(std::exp(x - m));
  return m + std::log(acc.value() / static_cast<double>(xs.size()));
}

namespace {

// 15-point Kronrod nodes (nonnegative half) with the embedded 7-point Gauss rule.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,  // Kronrod only
    0.949107912342758524526189684047851,  // Gauss
    0.864864423359769072789712788640926,  // Kronrod only
    0.741531185599394439863864773280788,  // Gauss
    0.586087235467691130294144838258730,  // Kronrod only
    0.405845151377397166906606412076961,  // Gauss
    0.207784955007898467600689403773245,  // Kronrod only
    0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct GkEstimate {
  double integral;
  double err;
};

GkEstimate gk15(const std::function<double(double)>& g, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fc = g(c);
  double res_g = fc * kWg[3];
  double res_k = fc * kWgk[7];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = g(c - dx);
    const double f2 = g(c + dx);
    res_k += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) res_g += kWg[j / 2] * (f1 + f2);
  }
  res_k *= h;
  res_g *= h;
  return {res_k, std::fabs(res_k - res_g)};
}

struct Segment {
  double a, b, integral, err;
  bool operator<(const Segment& o) const { return err < o.err; }
};

}  // namespace

double integrate(const std::function<double(double)>& g, double a, double b,
                 double abs_tol) {
  if (!(abs_tol > 0.0)) throw domain_error("integrate: tolerance must be positive");
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw domain_error("integrate: non-finite integration bounds");
  }
  double sign = 1.0;
  if (a == b) return 0.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }

  constexpr int kMaxSegments = 4096;
  std::priority_queue<Segment> queue;
  const GkEstimate first = gk15(g, a, b);
  queue.push({a, b, first.integral, first.err});
  double total_err = first.err;
  int n_segments = 1;

  while (total_err > abs_tol && n_segments < kMaxSegments) {
    const Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const GkEstimate left = gk15(g, worst.a, mid);
    const GkEstimate right = gk15(g, mid, worst.b);
    total_err += left.err + right.err - worst.err;
    queue.push({worst.a, mid, left.integral, left.err});
    queue.push({mid, worst.b, right.integral, right.err});
    ++n_segments;
  }

  KahanSum acc;
  KahanSum err_acc;
  while (!queue.empty()) {
    acc.add(queue.top().integral);
    err_acc.add(queue.top().err);
    queue.pop();
  }
  if (err_acc.value() > abs_tol) {
    throw numeric_error("integrate: tolerance not met after segment limit",
                        err_acc.value());
  }
  return sign * acc.value();
}

double golden_section_minimize(const std::function<double(double)>& g, double a,
                               double b, double x_tol) {
  if (!(a < b)) throw domain_error("golden_section_minimize: need a < b");
  if (!(x_tol > 0.0)) throw domain_error("golden_section_minimize: tolerance must be positive");
  constexpr double invphi = 0.6180339887498949;  // (sqrt(5) - 1) / 2
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = g(x1);
  double f2 = g(x2);
  while (b - a > x_tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = g(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = g(x2);
    }
  }
  return 0.5 * (a + b);
}

RootResult bisect_newton(const std::function<double(double)>& g,
                         const std::function<double(double)>& g1, double lo,
                         double hi, double tol_residual) {
  if (!(lo < hi)) throw domain_error("bisect_newton: need lo < hi");
  double flo = g(lo);
  double fhi = g(hi);
  if (flo == 0.0) return {lo, 0.0};
  if (fhi == 0.0) return {hi, 0.0};
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw domain_error("bisect_newton: bracket does not straddle a root");
  }
  // Bisection carries the whole convergence burden; Newton only polishes.
  for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + std::fabs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = g(mid);
    if (fmid == 0.0) return {mid, 0.0};
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 5; ++it) {
    const double fx = g(x);
    const double dx = g1(x);
    if (dx == 0.0) break;
    const double next = x - fx / dx;
    if (next < lo || next > hi) break;  // keep the bracket guarantee
    x = next;
  }
  const double residual = std::fabs(g(x));
  if (!(residual <= tol_residual)) {
    throw numeric_error("bisect_newton: residual above tolerance", residual);
  }
  return {x, residual};
}

}  // namespace ftb::num
