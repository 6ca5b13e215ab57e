// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Tabular trainer implementation.

#include "ftb/gfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ftb/devgrad.hpp"
#include "ftb/loss.hpp"
#include "ftb/num.hpp"

namespace ftb {

namespace {

void check_tabular(const HypergridEnv& env, const char* where) {
  if (env.n_states() > kMaxEnumerable) {
    throw domain_error(std::string(where) + ": state space too large for tabular policies");
  }
}

// Allowed actions and forward log-probabilities at one state (masked softmax).
struct ActionDist {
  std::vector<int> actions;
  std::vector<double> logp;
};

ActionDist forward_logdist(const PolicyParams& params, const HypergridEnv& env,
                           const std::vector<int>& coords, std::int64_t s) {
  ActionDist out;
  out.actions.reserve(env.d() + 1);
  for (int k = 0; k < env.d(); ++k) {
    if (coords[k] + 1 < env.h()) out.actions.push_back(k);
  }
  out.actions.push_back(env.terminate_action());
  const double* row = params.forward_logits.data() + s * (env.d() + 1);
  double mx = row[out.actions[0]];
  for (int a : out.actions) mx = std::max(mx, row[a]);
  double sum = 0.0;
  for (int a : out.actions) sum += std::exp(row[a] - mx);
  const double lse = mx + std::log(sum);
  out.logp.reserve(out.actions.size());
  for (int a : out.actions) out.logp.push_back(row[a] - lse);
  return out;
}

// Legal backward dimensions and log-probabilities at a child state.
struct BackwardDist {
  std::vector<int> dims;
  std::vector<double> logp;
};

BackwardDist backward_logdist(const PolicyParams& params, const HypergridEnv& env,
                              const std::vector<int>& coords, std::int64_t s) {
  BackwardDist out;
  for (int k = 0; k < env.d(); ++k) {
    if (coords[k] > 0) out.dims.push_back(k);
  }
  if (out.dims.empty()) {
    throw domain_error("backward_logdist: the origin has no parents");
  }
  if (params.backward_mode == BackwardMode::uniform) {
    const double lp = -std::log(static_cast<double>(out.dims.size()));
    out.logp.assign(out.dims.size(), lp);
    return out;
  }
  const double* row = params.backward_logits.data() + s * env.d();
  double mx = row[out.dims[0]];
  for (int k : out.dims) mx = std::max(mx, row[k]);
  double sum = 0.0;
  for (int k : out.dims) sum += std::exp(row[k] - mx);
  const double lse = mx + std::log(sum);
  out.logp.reserve(out.dims.size());
  for (int k : out.dims) out.logp.push_back(row[k] - lse);
  return out;
}

// Per-trajectory log-quantities, computed in one walk (no re-validation).
struct TrajTerms {
  double log_pf = 0.0;
  double log_pb = 0.0;
  double log_r = 0.0;
};

TrajTerms trajectory_terms(const PolicyParams& params, const HypergridEnv& env,
                           const Trajectory& traj) {
  TrajTerms out;
  for (std::size_t i = 0; i < traj.actions.size(); ++i) {
    const std::int64_t s = traj.states[i];
    const std::vector<int> coords = env.coords_of(s);
    const ActionDist dist = forward_logdist(params, env, coords, s);
    const int a = traj.actions[i];
    const auto it = std::find(dist.actions.begin(), dist.actions.end(), a);
    if (it == dist.actions.end()) {
      throw domain_error("trajectory_terms: illegal action in trajectory");
    }
    out.log_pf += dist.logp[it - dist.actions.begin()];
    if (a != env.terminate_action()) {
      const std::int64_t child = traj.states[i + 1];
      const std::vector<int> child_coords = env.coords_of(child);
      const BackwardDist bd = backward_logdist(params, env, child_coords, child);
      const auto bit = std::find(bd.dims.begin(), bd.dims.end(), a);
      out.log_pb += bd.logp[bit - bd.dims.begin()];
    }
  }
  out.log_r = std::log(reward(env, env.coords_of(traj.states.back())));
  return out;
}

std::string format_batch_deltas(std::span<const double> deltas) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (i) os << ", ";
    os << deltas[i];
  }
  os << "]";
  return os.str();
}

void adam_update(double& theta, double& m, double& v, double g, double lr,
                 const AdamParams& p, double bc1, double bc2) {
  m = p.beta1 * m + (1.0 - p.beta1) * g;
  v = p.beta2 * v + (1.0 - p.beta2) * g * g;
  theta -= lr * (m / bc1) / (std::sqrt(v / bc2) + p.eps);
}

}  // namespace

PolicyParams PolicyParams::uniform_init(const HypergridEnv& env, BackwardMode mode) {
  check_tabular(env, "PolicyParams::uniform_init");
  PolicyParams p;
  p.forward_logits.assign(static_cast<std::size_t>(env.n_states()) * (env.d() + 1), 0.0);
  p.log_z = 0.0;
  p.backward_mode = mode;
  if (mode == BackwardMode::learnable) {
    p.backward_logits.assign(static_cast<std::size_t>(env.n_states()) * env.d(), 0.0);
  }
  return p;
}

double forward_trajectory_logprob(const PolicyParams& params, const HypergridEnv& env,
                                  const Trajectory& traj) {
  validate_trajectory(env, traj);
  double lp = 0.0;
  for (std::size_t i = 0; i < traj.actions.size(); ++i) {
    const std::int64_t s = traj.states[i];
    const ActionDist dist = forward_logdist(params, env, env.coords_of(s), s);
    const auto it = std::find(dist.actions.begin(), dist.actions.end(), traj.actions[i]);
    lp += dist.logp[it - dist.actions.begin()];
  }
  return lp;
}

double backward_trajectory_logprob(const PolicyParams& params, const HypergridEnv& env,
                                   const Trajectory& traj) {
  validate_trajectory(env, traj);
  double lp = 0.0;
  for (std::size_t i = 0; i + 1 < traj.actions.size(); ++i) {
    const std::int64_t child = traj.states[i + 1];
    const BackwardDist bd = backward_logdist(params, env, env.coords_of(child), child);
    const auto it = std::find(bd.dims.begin(), bd.dims.end(), traj.actions[i]);
    lp += bd.logp[it - bd.dims.begin()];
  }
  return lp;
}

double trajectory_delta(const PolicyParams& params, const HypergridEnv& env,
                        const Trajectory& traj) {
  validate_trajectory(env, traj);
  const TrajTerms t = trajectory_terms(params, env, traj);
  return params.log_z + t.log_pf - t.log_r - t.log_pb;
}

std::pair<Trajectory, double> sample_trajectory(const PolicyParams& params,
                                                const HypergridEnv& env,
                                                const BehaviorPolicy& behavior,
                                                Rng& rng) {
  if (behavior.mode == BehaviorPolicy::Mode::eps_uniform &&
      !(behavior.eps >= 0.0 && behavior.eps <= 1.0)) {
    throw domain_error("sample_trajectory: eps must lie in [0, 1]");
  }
  if (behavior.mode == BehaviorPolicy::Mode::tempered &&
      (!(behavior.temperature > 0.0) || !std::isfinite(behavior.temperature))) {
    throw domain_error("sample_trajectory: temperature must be finite and positive");
  }
  Trajectory traj;
  double log_mu = 0.0;
  std::vector<int> coords(env.d(), 0);
  std::int64_t s = 0;
  for (;;) {
    traj.states.push_back(s);
    const ActionDist dist = forward_logdist(params, env, coords, s);
    const std::size_t n = dist.actions.size();
    std::vector<double> q(n);
    switch (behavior.mode) {
      case BehaviorPolicy::Mode::on_policy:
        for (std::size_t i = 0; i < n; ++i) q[i] = std::exp(dist.logp[i]);
        break;
      case BehaviorPolicy::Mode::eps_uniform:
        for (std::size_t i = 0; i < n; ++i) {
          q[i] = (1.0 - behavior.eps) * std::exp(dist.logp[i]) +
                 behavior.eps / static_cast<double>(n);
        }
        break;
      case BehaviorPolicy::Mode::tempered: {
        const double* row = params.forward_logits.data() + s * (env.d() + 1);
        double mx = row[dist.actions[0]] / behavior.temperature;
        for (int a : dist.actions) mx = std::max(mx, row[a] / behavior.temperature);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          q[i] = std::exp(row[dist.actions[i]] / behavior.temperature - mx);
          sum += q[i];
        }
        for (std::size_t i = 0; i < n; ++i) q[i] /= sum;
        break;
      }
    }
    const double u = rng.next_double();
    std::size_t pick = n - 1;  // fallback: cumulative sums may fall short of 1
    double cum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cum += q[i];
      if (u < cum) {
        pick = i;
        break;
      }
    }
    const int a = dist.actions[pick];
    log_mu += std::log(q[pick]);
    traj.actions.push_back(a);
    if (a == env.terminate_action()) break;
    ++coords[a];
    s = env.state_index(coords);
  }
  return {std::move(traj), log_mu};
}

BatchGradients compute_batch_gradients(const PolicyParams& params,
                                       const HypergridEnv& env,
                                       const DivergenceSpec& spec,
                                       Normalization normalization,
                                       std::span<const Trajectory> batch,
                                       bool want_loss) {
  if (batch.empty()) throw domain_error("compute_batch_gradients: empty batch");
  const std::size_t batch_size = batch.size();

  BatchGradients out;
  out.d_forward.assign(params.forward_logits.size(), 0.0);
  out.d_backward.assign(params.backward_logits.size(), 0.0);
  out.deltas.resize(batch_size);

  // Pass 1: deviations. devgrad centers them with the batch normalizer and
  // keeps log_z out; learnable_z bakes the parameter into the deltas.
  for (std::size_t i = 0; i < batch_size; ++i) {
    const TrajTerms t = trajectory_terms(params, env, batch[i]);
    const double base = t.log_pf - t.log_r - t.log_pb;
    out.deltas[i] = normalization == Normalization::learnable_z ? params.log_z + base : base;
  }

  std::vector<double> weights;
  if (normalization == Normalization::devgrad) {
    const DevGradResult res = devgrad_batch_loss(spec, out.deltas);
    weights = res.weights;
    out.log_z_estimate = res.log_z_hat;
    if (want_loss) out.mean_loss = res.loss;
  } else {
    out.log_z_estimate = params.log_z;
    weights.resize(batch_size);
    num::KahanSum loss_acc;
    for (std::size_t i = 0; i < batch_size; ++i) {
      weights[i] = loss_deriv(spec, out.deltas[i]);
      if (want_loss) loss_acc.add(loss_eval(spec, out.deltas[i]));
    }
    if (want_loss) out.mean_loss = loss_acc.value() / static_cast<double>(batch_size);
  }

  // Pass 2: accumulate c_i * d(delta_i)/d(theta) with c_i = w_i / B.
  for (std::size_t i = 0; i < batch_size; ++i) {
    const Trajectory& traj = batch[i];
    const double c = weights[i] / static_cast<double>(batch_size);
    for (std::size_t t = 0; t < traj.actions.size(); ++t) {
      const std::int64_t s = traj.states[t];
      const std::vector<int> coords = env.coords_of(s);
      const ActionDist dist = forward_logdist(params, env, coords, s);
      double* row = out.d_forward.data() + s * (env.d() + 1);
      const int a = traj.actions[t];
      for (std::size_t j = 0; j < dist.actions.size(); ++j) {
        row[dist.actions[j]] += c * ((dist.actions[j] == a ? 1.0 : 0.0) - std::exp(dist.logp[j]));
      }
      if (a != env.terminate_action() && params.backward_mode == BackwardMode::learnable) {
        const std::int64_t child = traj.states[t + 1];
        const std::vector<int> child_coords = env.coords_of(child);
        const BackwardDist bd = backward_logdist(params, env, child_coords, child);
        double* brow = out.d_backward.data() + child * env.d();
        // d(delta)/d(backward logit) = -d(log pi_B)/d(logit)
        for (std::size_t j = 0; j < bd.dims.size(); ++j) {
          brow[bd.dims[j]] -= c * ((bd.dims[j] == a ? 1.0 : 0.0) - std::exp(bd.logp[j]));
        }
      }
    }
    if (normalization == Normalization::learnable_z) out.d_log_z += c;
  }
  return out;
}

AdamState AdamState::init(const PolicyParams& params) {
  AdamState s;
  s.m_f.assign(params.forward_logits.size(), 0.0);
  s.v_f.assign(params.forward_logits.size(), 0.0);
  s.m_b.assign(params.backward_logits.size(), 0.0);
  s.v_b.assign(params.backward_logits.size(), 0.0);
  return s;
}

StepStats train_step(PolicyParams& params, AdamState& adam, const HypergridEnv& env,
                     const DivergenceSpec& spec, Normalization normalization,
                     const AdamParams& adam_params, std::span<const Trajectory> batch,
                     bool want_loss) {
  const BatchGradients g =
      compute_batch_gradients(params, env, spec, normalization, batch, want_loss);

  const auto all_finite = [](std::span<const double> xs) {
    for (double x : xs) {
      if (!std::isfinite(x)) return false;
    }
    return true;
  };
  if (!all_finite(g.d_forward) || !std::isfinite(g.d_log_z) || !all_finite(g.d_backward)) {
    throw numeric_error(
        "train_step: non-finite gradient; batch deltas: " + format_batch_deltas(g.deltas),
        std::numeric_limits<double>::quiet_NaN());
  }

  adam.t += 1;
  const double bc1 = 1.0 - std::pow(adam_params.beta1, static_cast<double>(adam.t));
  const double bc2 = 1.0 - std::pow(adam_params.beta2, static_cast<double>(adam.t));
  for (std::size_t j = 0; j < params.forward_logits.size(); ++j) {
    adam_update(params.forward_logits[j], adam.m_f[j], adam.v_f[j], g.d_forward[j],
                adam_params.lr, adam_params, bc1, bc2);
  }
  if (normalization == Normalization::learnable_z) {
    adam_update(params.log_z, adam.m_z, adam.v_z, g.d_log_z,
                adam_params.lr * adam_params.log_z_lr_multiplier, adam_params, bc1, bc2);
  }
  if (params.backward_mode == BackwardMode::learnable) {
    for (std::size_t j = 0; j < params.backward_logits.size(); ++j) {
      adam_update(params.backward_logits[j], adam.m_b[j], adam.v_b[j], g.d_backward[j],
                  adam_params.lr, adam_params, bc1, bc2);
    }
  }

  StepStats stats;
  stats.mean_loss = g.mean_loss;
  stats.log_z_estimate =
      normalization == Normalization::devgrad ? g.log_z_estimate : params.log_z;
  return stats;
}

std::vector<double> policy_terminal_distribution(const PolicyParams& params,
                                                 const HypergridEnv& env) {
  check_tabular(env, "policy_terminal_distribution");
  std::vector<double> inflow(env.n_states(), 0.0);
  std::vector<double> p_term(env.n_states(), 0.0);
  inflow[0] = 1.0;
  for (const auto& bucket : states_by_coord_sum(env)) {
    for (std::int64_t s : bucket) {
      if (inflow[s] == 0.0) continue;
      const std::vector<int> coords = env.coords_of(s);
      const ActionDist dist = forward_logdist(params, env, coords, s);
      for (std::size_t j = 0; j < dist.actions.size(); ++j) {
        const double mass = inflow[s] * std::exp(dist.logp[j]);
        if (dist.actions[j] == env.terminate_action()) {
          p_term[s] += mass;
        } else {
          std::vector<int> next = coords;
          ++next[dist.actions[j]];
          inflow[env.state_index(next)] += mass;
        }
      }
    }
  }
  num::KahanSum total;
  for (double v : p_term) total.add(v);
  if (std::fabs(total.value() - 1.0) > 1e-10) {
    throw numeric_error("policy_terminal_distribution: mass does not sum to 1",
                        std::fabs(total.value() - 1.0));
  }
  return p_term;
}

double distribution_l1(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw domain_error("distribution_l1: size mismatch");
  num::KahanSum acc;
  for (std::size_t i = 0; i < p.size(); ++i) acc.add(std::fabs(p[i] - q[i]));
  return acc.value();
}

double distribution_jsd(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw domain_error("distribution_jsd: size mismatch");
  num::KahanSum acc;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) acc.add(0.5 * p[i] * std::log(p[i] / m));
    if (q[i] > 0.0) acc.add(0.5 * q[i] * std::log(q[i] / m));
  }
  return acc.value();
}

namespace {

// Shared walk for the two gradient-match diagnostics: accumulates
// weight * d(log pi_F)/d(theta) (forward) into a dense buffer.
void accumulate_forward_score(const PolicyParams& params, const HypergridEnv& env,
                              const Trajectory& traj, double weight,
                              std::vector<double>& buf) {
  for (std::size_t t = 0; t < traj.actions.size(); ++t) {
    const std::int64_t s = traj.states[t];
    const ActionDist dist = forward_logdist(params, env, env.coords_of(s), s);
    double* row = buf.data() + s * (env.d() + 1);
    for (std::size_t j = 0; j < dist.actions.size(); ++j) {
      row[dist.actions[j]] +=
          weight * ((dist.actions[j] == traj.actions[t] ? 1.0 : 0.0) - std::exp(dist.logp[j]));
    }
  }
}

void accumulate_backward_score(const PolicyParams& params, const HypergridEnv& env,
                               const Trajectory& traj, double weight,
                               std::vector<double>& buf) {
  for (std::size_t t = 0; t + 1 < traj.actions.size(); ++t) {
    const std::int64_t child = traj.states[t + 1];
    const BackwardDist bd = backward_logdist(params, env, env.coords_of(child), child);
    double* row = buf.data() + child * env.d();
    for (std::size_t j = 0; j < bd.dims.size(); ++j) {
      row[bd.dims[j]] +=
          weight * ((bd.dims[j] == traj.actions[t] ? 1.0 : 0.0) - std::exp(bd.logp[j]));
    }
  }
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace

double forward_gradient_match_error(const PolicyParams& params, const HypergridEnv& env,
                                    const DivergenceSpec& spec) {
  const std::vector<Trajectory> all = enumerate_trajectories(env);
  std::vector<double> lhs(params.forward_logits.size(), 0.0);
  std::vector<double> rhs(params.forward_logits.size(), 0.0);
  for (const Trajectory& traj : all) {
    const TrajTerms t = trajectory_terms(params, env, traj);
    const double delta = params.log_z + t.log_pf - t.log_r - t.log_pb;
    // Surrogate side: E_{pi_F}[L'(delta) * score].
    const double w_lhs = std::exp(t.log_pf) * loss_deriv(spec, delta);
    // Divergence side: d/d(theta) sum_tau q f(u) = sum_tau q f'(u) u * score,
    // with q = R pi_B / Z and u = pi_F / q = e^delta.
    const double q = std::exp(t.log_pb + t.log_r - params.log_z);
    const double u = num::checked_exp(delta, "forward_gradient_match_error");
    const double w_rhs = q * generator_eval(spec, u).f1 * u;
    accumulate_forward_score(params, env, traj, w_lhs, lhs);
    accumulate_forward_score(params, env, traj, w_rhs, rhs);
  }
  return max_abs_diff(lhs, rhs);
}

double backward_gradient_match_error(const PolicyParams& params, const HypergridEnv& env,
                                     const DivergenceSpec& spec) {
  if (params.backward_mode != BackwardMode::learnable) {
    throw domain_error("backward_gradient_match_error: needs learnable backward parameters");
  }
  const std::vector<Trajectory> all = enumerate_trajectories(env);
  std::vector<double> lhs(params.backward_logits.size(), 0.0);
  std::vector<double> rhs(params.backward_logits.size(), 0.0);
  for (const Trajectory& traj : all) {
    const TrajTerms t = trajectory_terms(params, env, traj);
    const double delta = params.log_z + t.log_pf - t.log_r - t.log_pb;
    const double q = std::exp(t.log_pb + t.log_r - params.log_z);
    // Surrogate side under the tilted measure: d(delta)/d(phi) = -d(log pi_B)/d(phi).
    const double w_lhs = -q * loss_deriv(spec, delta);
    // Divergence side: d/d(phi) D_h(q || pi_F) = sum_tau q h'(v) * backward score,
    // v = q / pi_F = e^{-delta}.
    const double v = num::checked_exp(-delta, "backward_gradient_match_error");
    const double w_rhs = q * backward_generator_eval(spec, v).h1;
    accumulate_backward_score(params, env, traj, w_lhs, lhs);
    accumulate_backward_score(params, env, traj, w_rhs, rhs);
  }
  return max_abs_diff(lhs, rhs);
}

VarianceComparison gradient_variance_comparison(const PolicyParams& params,
                                                const HypergridEnv& env,
                                                const DivergenceSpec& spec,
                                                int n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw domain_error("gradient_variance_comparison: need n_samples >= 2");
  check_tabular(env, "gradient_variance_comparison");
  // True log-normalizer of the target: log sum_x R(x).
  num::KahanSum zsum;
  for (std::int64_t s = 0; s < env.n_states(); ++s) {
    zsum.add(reward(env, env.coords_of(s)));
  }
  const double log_z_star = std::log(zsum.value());

  const BehaviorPolicy on_policy{};
  std::vector<double> mean_w(params.forward_logits.size(), 0.0);
  std::vector<double> mean_s(params.forward_logits.size(), 0.0);
  double sq_w = 0.0;
  double sq_s = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    Rng rng = Rng::substream(seed, 0, static_cast<std::uint64_t>(i));
    const auto [traj, log_mu] = sample_trajectory(params, env, on_policy, rng);
    const TrajTerms t = trajectory_terms(params, env, traj);
    const double delta = log_z_star + t.log_pf - t.log_r - t.log_pb;
    const double u = num::checked_exp(delta, "gradient_variance_comparison");
    const double f1 = generator_eval(spec, u).f1;

    // Squared norm of the per-step score, blocks disjoint across steps.
    double score_sq = 0.0;
    for (std::size_t step = 0; step < traj.actions.size(); ++step) {
      const std::int64_t s = traj.states[step];
      const ActionDist dist = forward_logdist(params, env, env.coords_of(s), s);
      for (std::size_t j = 0; j < dist.actions.size(); ++j) {
        const double g =
            (dist.actions[j] == traj.actions[step] ? 1.0 : 0.0) - std::exp(dist.logp[j]);
        score_sq += g * g;
      }
    }
    sq_w += (f1 - 1.0) * (f1 - 1.0) * score_sq;
    sq_s += f1 * f1 * score_sq;
    accumulate_forward_score(params, env, traj, f1 - 1.0, mean_w);
    accumulate_forward_score(params, env, traj, f1, mean_s);
  }
  const double n = static_cast<double>(n_samples);
  double norm_mean_w = 0.0;
  double norm_mean_s = 0.0;
  for (std::size_t j = 0; j < mean_w.size(); ++j) {
    norm_mean_w += (mean_w[j] / n) * (mean_w[j] / n);
    norm_mean_s += (mean_s[j] / n) * (mean_s[j] / n);
  }
  return {sq_w / n - norm_mean_w, sq_s / n - norm_mean_s};
}

}  // namespace ftb
