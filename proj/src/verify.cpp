// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Verification suite implementation.

#include "ftb/verify.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ftb/devgrad.hpp"
#include "ftb/gfn.hpp"
#include "ftb/loss.hpp"
#include "ftb/num.hpp"
#include "ftb/rng.hpp"
#include "ftb/runner.hpp"

namespace ftb {

namespace {

constexpr std::uint64_t kVerifySeed = 12345;
constexpr double kDeltaGrid[] = {-5.0, -2.0, -0.5, 0.0, 0.5, 2.0, 5.0};

CheckResult make_check(const std::string& name, double max_err, double tol) {
  return {name, max_err <= tol, max_err, tol};
}

// ---- losses -----------------------------------------------------------------

void check_losses(std::vector<CheckResult>& out) {
  for (const DivergenceSpec& spec : full_spec_list()) {
    double max_err = 0.0;
    for (double d : kDeltaGrid) {
      max_err = std::max(max_err, std::fabs(loss_eval(spec, d) - loss_numeric(spec, d)));
    }
    out.push_back(make_check("loss_closed_vs_numeric:" + divergence_name(spec), max_err, 1e-8));
  }
  for (const DivergenceSpec& spec : full_spec_list()) {
    // Central finite difference of the loss against the closed derivative.
    double max_err = 0.0;
    for (double d : kDeltaGrid) {
      if (spec.kind == Divergence::tv && d == 0.0) continue;  // kink
      const double h = 1e-6;
      const double fd = (loss_eval(spec, d + h) - loss_eval(spec, d - h)) / (2.0 * h);
      max_err = std::max(max_err, std::fabs(fd - loss_deriv(spec, d)));
    }
    out.push_back(make_check("loss_deriv_fd:" + divergence_name(spec), max_err, 1e-5));
  }
}

// ---- devgrad ----------------------------------------------------------------

std::vector<double> random_batch(Rng& rng, std::size_t n, double scale) {
  std::vector<double> xs(n);
  for (double& x : xs) x = scale * (2.0 * rng.next_double() - 1.0);
  return xs;
}

// Value-only golden section stalls near sqrt(eps) at a smooth minimum (loss
// differences fall below roundoff), so polish its answer with one parabolic
// vertex fit at a spacing where differences are resolvable again. Smooth
// strictly convex g only; a kinked minimum must keep the golden answer.
double refine_minimum(const std::function<double(double)>& g, double x0, double h) {
  const double lo = g(x0 - h), mid = g(x0), hi = g(x0 + h);
  const double curvature = hi - 2.0 * mid + lo;
  if (!(curvature > 0.0)) return x0;
  const double vertex = x0 - h * (hi - lo) / (2.0 * curvature);
  if (!std::isfinite(vertex) || std::fabs(vertex - x0) > h) return x0;
  return vertex;
}

void check_devgrad(std::vector<CheckResult>& out) {
  std::uint64_t stream = 0;
  for (const DivergenceSpec& spec : full_spec_list()) {
    const bool tv = canonicalize(spec).kind == Divergence::tv;
    // Odd batch sizes for TV: its minimizer is an interval for even sizes, so
    // only the odd-size median is comparable against a generic minimizer.
    const std::vector<std::size_t> sizes =
        tv ? std::vector<std::size_t>{3, 5, 17, 257} : std::vector<std::size_t>{2, 4, 16, 256};
    double max_zero_sum = 0.0;  // |sum w| / B
    double max_gold_err = 0.0;
    for (int rep = 0; rep < 25; ++rep) {
      for (std::size_t size : sizes) {
        Rng rng = Rng::substream(kVerifySeed, 1, stream++);
        const std::vector<double> deltas = random_batch(rng, size, 4.0);
        const DevGradResult res = devgrad_batch_loss(spec, deltas);
        double sum = 0.0;
        for (double w : res.weights) sum += w;
        max_zero_sum = std::max(max_zero_sum, std::fabs(sum) / static_cast<double>(size));
        double lo = deltas[0], hi = deltas[0];
        for (double d : deltas) {
          lo = std::min(lo, d);
          hi = std::max(hi, d);
        }
        const auto batch_loss = [&](double c) {
          num::KahanSum acc;
          for (double d : deltas) acc.add(loss_eval(spec, d + c));
          return acc.value() / static_cast<double>(size);
        };
        double golden =
            num::golden_section_minimize(batch_loss, -hi - 40.0, -lo + 40.0, 1e-10);
        if (!tv) golden = refine_minimum(batch_loss, golden, 1e-4);
        max_gold_err = std::max(max_gold_err, std::fabs(res.log_z_hat - golden));
      }
    }
    out.push_back(make_check("devgrad_zero_sum:" + divergence_name(spec), max_zero_sum, 1e-9));
    out.push_back(
        make_check("devgrad_log_z_vs_golden:" + divergence_name(spec), max_gold_err, 1e-8));
  }
}

// ---- gradients --------------------------------------------------------------

PolicyParams random_params(const HypergridEnv& env, BackwardMode mode, Rng& rng) {
  PolicyParams p = PolicyParams::uniform_init(env, mode);
  for (double& x : p.forward_logits) x = 2.0 * (2.0 * rng.next_double() - 1.0);
  p.log_z = 2.0 * rng.next_double() - 1.0;
  for (double& x : p.backward_logits) x = 2.0 * (2.0 * rng.next_double() - 1.0);
  return p;
}

void check_gradients(std::vector<CheckResult>& out) {
  std::uint64_t stream = 0;
  for (const DivergenceSpec& spec : full_spec_list()) {
    double max_fwd = 0.0;
    double max_bwd = 0.0;
    for (int h : {2, 3}) {
      const HypergridEnv env(2, h, 0.001);
      for (int rep = 0; rep < 10; ++rep) {
        Rng rng = Rng::substream(kVerifySeed, 2, stream++);
        const PolicyParams params = random_params(env, BackwardMode::learnable, rng);
        max_fwd = std::max(max_fwd, forward_gradient_match_error(params, env, spec));
        max_bwd = std::max(max_bwd, backward_gradient_match_error(params, env, spec));
      }
    }
    out.push_back(make_check("forward_gradient_match:" + divergence_name(spec), max_fwd, 1e-8));
    out.push_back(make_check("backward_gradient_match:" + divergence_name(spec), max_bwd, 1e-6));
  }
}

// ---- inverse ----------------------------------------------------------------

void check_inverse(std::vector<CheckResult>& out) {
  for (const DivergenceSpec& spec : full_spec_list()) {
    if (canonicalize(spec).kind == Divergence::tv) continue;  // not strictly convex
    const auto deriv = [&spec](double x) { return loss_deriv(spec, x); };
    double max_err = 0.0;
    for (double u = 0.2; u <= 5.0 + 1e-12; u += 0.05) {
      max_err =
          std::max(max_err, std::fabs(inverse_generator(deriv, u) - generator_eval(spec, u).f));
    }
    out.push_back(make_check("inverse_round_trip:" + divergence_name(spec), max_err, 1e-5));
  }
  // The squared loss must map back to u log u.
  double max_err = 0.0;
  for (double u = 0.2; u <= 5.0 + 1e-12; u += 0.05) {
    max_err = std::max(
        max_err, std::fabs(inverse_generator([](double x) { return x; }, u) - u * std::log(u)));
  }
  out.push_back(make_check("inverse_squared_loss_recovers_u_log_u", max_err, 1e-6));
}

// ---- variance ---------------------------------------------------------------

void check_variance(std::vector<CheckResult>& out) {
  TrainConfig cfg;
  cfg.env_d = 2;
  cfg.env_h = 8;
  cfg.env_r0 = 0.001;
  cfg.spec = DivergenceSpec::named(Divergence::reverse_kl);
  cfg.behavior.mode = BehaviorPolicy::Mode::eps_uniform;
  cfg.behavior.eps = 0.5;
  cfg.batch_size = 64;
  cfg.steps = 6000;
  cfg.lr = 1e-2;
  cfg.seed = kVerifySeed;
  cfg.eval_interval = 1000;
  const RunResult run = train_run(cfg);
  const double final_l1 = run.rows.back().l1;
  out.push_back(make_check("variance_policy_converged_l1", final_l1, 0.01));

  const HypergridEnv env(cfg.env_d, cfg.env_h, cfg.env_r0);
  for (const DivergenceSpec& spec : strictly_convex_spec_list()) {
    const VarianceComparison cmp =
        gradient_variance_comparison(run.params, env, spec, 4000, kVerifySeed + 7);
    // Pass iff the weighted estimator's variance is strictly smaller.
    out.push_back(
        make_check("variance_reduction:" + divergence_name(spec),
                   cmp.var_weighted - cmp.var_score, 0.0));
  }
}

}  // namespace

const std::vector<DivergenceSpec>& full_spec_list() {
  static const std::vector<DivergenceSpec> specs = [] {
    std::vector<DivergenceSpec> v = named_catalog();
    for (double a : {0.0, 0.5, 0.75, 1.0, 1.2, 2.0}) {
      v.push_back(DivergenceSpec::alpha_family(a));
    }
    return v;
  }();
  return specs;
}

const std::vector<DivergenceSpec>& strictly_convex_spec_list() {
  static const std::vector<DivergenceSpec> specs = {
      DivergenceSpec::named(Divergence::reverse_kl),
      DivergenceSpec::named(Divergence::forward_kl),
      DivergenceSpec::named(Divergence::pearson),
      DivergenceSpec::named(Divergence::neyman),
      DivergenceSpec::named(Divergence::hellinger),
      DivergenceSpec::named(Divergence::jsd),
      DivergenceSpec::alpha_family(0.75),
      DivergenceSpec::alpha_family(1.2),
  };
  return specs;
}

std::vector<CheckResult> verify_suite(const std::string& suite) {
  std::vector<CheckResult> out;
  bool known = false;
  if (suite == "losses" || suite == "all") {
    check_losses(out);
    known = true;
  }
  if (suite == "devgrad" || suite == "all") {
    check_devgrad(out);
    known = true;
  }
  if (suite == "gradients" || suite == "all") {
    check_gradients(out);
    known = true;
  }
  if (suite == "inverse" || suite == "all") {
    check_inverse(out);
    known = true;
  }
  if (suite == "variance" || suite == "all") {
    check_variance(out);
    known = true;
  }
  if (!known) throw config_error("verify: unknown suite '" + suite + "'");
  return out;
}

std::string report_json(const std::string& suite, const std::vector<CheckResult>& checks) {
  nlohmann::ordered_json j;
  j["suite"] = suite;
  j["checks"] = nlohmann::ordered_json::array();
  for (const CheckResult& c : checks) {
    j["checks"].push_back({{"name", c.name},
                           {"pass", c.pass},
                           {"max_err", c.max_err},
                           {"tolerance", c.tolerance}});
  }
  return j.dump(2) + "\n";
}

}  // namespace ftb
