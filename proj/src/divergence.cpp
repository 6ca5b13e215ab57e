// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Generator catalog implementation.

#include "ftb/divergence.hpp"

#include <cmath>

#include "ftb/num.hpp"

namespace ftb {

namespace {

void check_u(double u, const char* where) {
  if (!std::isfinite(u) || u <= 0.0) {
    throw domain_error(std::string(where) + ": u must be finite and positive, got " +
                       std::to_string(u));
  }
}

// u^k as exp(k log u), guarded against exponent overflow.
double checked_pow(double u, double k, const char* where) {
  if (k == 0.0) return 1.0;
  return num::checked_exp(k * std::log(u), where);
}

}  // namespace

DivergenceSpec DivergenceSpec::named(Divergence kind) {
  if (kind == Divergence::alpha) {
    throw config_error("DivergenceSpec::named: alpha family needs a value; use alpha_family");
  }
  return DivergenceSpec{kind, 1.0};
}

DivergenceSpec DivergenceSpec::alpha_family(double alpha) {
  if (!std::isfinite(alpha)) throw config_error("alpha_family: alpha must be finite");
  return DivergenceSpec{Divergence::alpha, alpha};
}

DivergenceSpec canonicalize(const DivergenceSpec& spec) {
  if (spec.kind != Divergence::alpha) return spec;
  if (std::fabs(spec.alpha - 1.0) < 1e-4) return DivergenceSpec{Divergence::reverse_kl, 1.0};
  if (std::fabs(spec.alpha) < 1e-4) return DivergenceSpec{Divergence::forward_kl, 1.0};
  return spec;
}

DivergenceSpec parse_divergence(std::string_view token, std::optional<double> alpha) {
  std::string name(token);
  if (const auto colon = name.find(':'); colon != std::string::npos) {
    const std::string value = name.substr(colon + 1);
    name = name.substr(0, colon);
    try {
      std::size_t used = 0;
      alpha = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw config_error("parse_divergence: bad alpha value '" + value + "'");
    }
  }
  if (name == "reverse_kl") return DivergenceSpec::named(Divergence::reverse_kl);
  if (name == "forward_kl") return DivergenceSpec::named(Divergence::forward_kl);
  if (name == "pearson") return DivergenceSpec::named(Divergence::pearson);
  if (name == "neyman") return DivergenceSpec::named(Divergence::neyman);
  if (name == "hellinger") return DivergenceSpec::named(Divergence::hellinger);
  if (name == "tv") return DivergenceSpec::named(Divergence::tv);
  if (name == "jsd") return DivergenceSpec::named(Divergence::jsd);
  if (name == "alpha") {
    if (!alpha) throw config_error("parse_divergence: alpha divergence needs a value");
    if (!std::isfinite(*alpha)) throw config_error("parse_divergence: alpha must be finite");
    return DivergenceSpec::alpha_family(*alpha);
  }
  throw config_error("parse_divergence: unknown divergence '" + name + "'");
}

std::string divergence_name(const DivergenceSpec& spec) {
  switch (spec.kind) {
    case Divergence::reverse_kl: return "reverse_kl";
    case Divergence::forward_kl: return "forward_kl";
    case Divergence::pearson: return "pearson";
    case Divergence::neyman: return "neyman";
    case Divergence::hellinger: return "hellinger";
    case Divergence::tv: return "tv";
    case Divergence::jsd: return "jsd";
    case Divergence::alpha: {
      char buf[48];
      std::snprintf(buf, sizeof buf, "alpha:%.17g", spec.alpha);
      return buf;
    }
  }
  throw config_error("divergence_name: invalid kind");
}

const std::vector<DivergenceSpec>& named_catalog() {
  static const std::vector<DivergenceSpec> cat = {
      DivergenceSpec::named(Divergence::reverse_kl),
      DivergenceSpec::named(Divergence::forward_kl),
      DivergenceSpec::named(Divergence::pearson),
      DivergenceSpec::named(Divergence::neyman),
      DivergenceSpec::named(Divergence::hellinger),
      DivergenceSpec::named(Divergence::tv),
      DivergenceSpec::named(Divergence::jsd),
  };
  return cat;
}

GeneratorValue generator_eval(const DivergenceSpec& spec_in, double u) {
  check_u(u, "generator_eval");
  const DivergenceSpec spec = canonicalize(spec_in);
  switch (spec.kind) {
    case Divergence::reverse_kl: {
      const double lu = std::log(u);
      return {u * lu, 1.0 + lu, 1.0 / u};
    }
    case Divergence::forward_kl:
      return {2.0 * (u - 1.0) - std::log(u), 2.0 - 1.0 / u, 1.0 / (u * u)};
    case Divergence::pearson: {
      const double t = u - 1.0;
      return {0.5 * t * t + t, u, 1.0};
    }
    case Divergence::neyman: {
      const double t = u - 1.0;
      return {0.5 * t * t / u + t, 1.5 - 0.5 / (u * u), 1.0 / (u * u * u)};
    }
    case Divergence::hellinger: {
      const double r = std::sqrt(u);
      const double t = r - 1.0;
      return {2.0 * t * t + (u - 1.0), 3.0 - 2.0 / r, 1.0 / (u * r)};
    }
    case Divergence::tv:
      // Subgradient convention at the kink: f'(1) = 1; f'' is 0 away from it.
      return {std::fabs(u - 1.0), u >= 1.0 ? 1.0 : -1.0, 0.0};
    case Divergence::jsd: {
      const double lu = std::log(u);
      const double lhalf = std::log(0.5 * (u + 1.0));
      return {2.0 * (u * lu - (u + 1.0) * lhalf) + (u - 1.0),
              2.0 * (std::log(2.0) + lu - std::log1p(u)) + 1.0,
              2.0 / (u * (u + 1.0))};
    }
    case Divergence::alpha: {
      const double a = spec.alpha;
      const double lu = std::log(u);
      num::check_exp_arg(a * lu, "generator_eval(alpha)");
      // (u^a - u)/(a(a-1)) + ((a-1)/a)(u-1), rearranged so the two singular
      // factors cancel through expm1 instead of by subtractive cancellation:
      // f(u) = [expm1(a log u) - a(2-a)(u-1)] / (a(a-1)).
      const double f =
          (std::expm1(a * lu) - a * (2.0 - a) * (u - 1.0)) / (a * (a - 1.0));
      const double f1 = 1.0 + num::expm1_over(a - 1.0, lu, "generator_eval(alpha)");
      const double f2 = checked_pow(u, a - 2.0, "generator_eval(alpha)");
      return {f, f1, f2};
    }
  }
  throw config_error("generator_eval: invalid kind");
}

BackwardGeneratorValue backward_generator_eval(const DivergenceSpec& spec_in, double u) {
  check_u(u, "backward_generator_eval");
  const DivergenceSpec spec = canonicalize(spec_in);
  switch (spec.kind) {
    case Divergence::reverse_kl: {
      const double lu = std::log(u);
      return {u * lu, 1.0 + lu};
    }
    case Divergence::forward_kl:
      return {0.5 * (u * u - 1.0), u};
    case Divergence::pearson:
      return {2.0 * (u - 1.0) - std::log(u), 2.0 - 1.0 / u};
    case Divergence::neyman:
      return {0.5 * (u - 1.0) + (u * u * u - 1.0) / 6.0, 0.5 + 0.5 * u * u};
    case Divergence::hellinger: {
      const double r = std::sqrt(u);
      return {(4.0 / 3.0) * (u * r - 1.0) - (u - 1.0), 2.0 * r - 1.0};
    }
    case Divergence::tv:
      // h'(u) = 2 - sgn(1/u - 1); at u = 1 the forward convention f'(1) = 1
      // gives h'(1) = 1.
      return {u >= 1.0 ? 3.0 * (u - 1.0) : u - 1.0, u >= 1.0 ? (u > 1.0 ? 3.0 : 1.0) : 1.0};
    case Divergence::jsd: {
      const double lhalf = std::log(0.5 * (u + 1.0));
      return {2.0 * (1.0 + u) * lhalf + (1.0 - u), 1.0 + 2.0 * lhalf};
    }
    case Divergence::alpha: {
      const double a = spec.alpha;
      const double lu = std::log(u);
      // h(u) = [a(u-1) - q(u)] / (a-1) with q(u) = expm1((2-a) log u)/(2-a);
      // the 2-a -> 0 limit (a = 2) turns q into log u.
      const double q = num::expm1_over(2.0 - a, lu, "backward_generator_eval(alpha)");
      const double h = (a * (u - 1.0) - q) / (a - 1.0);
      const double h1 =
          (a - num::checked_exp((1.0 - a) * lu, "backward_generator_eval(alpha)")) /
          (a - 1.0);
      return {h, h1};
    }
  }
  throw config_error("backward_generator_eval: invalid kind");
}

double onpolicy_backward_g2(const DivergenceSpec& spec, double u) {
  const GeneratorValue g = generator_eval(spec, u);
  return g.f1 / u + g.f2;
}

}  // namespace ftb
