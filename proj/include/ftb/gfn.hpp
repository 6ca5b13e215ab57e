// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Tabular trajectory-balance trainer on the hypergrid: masked softmax policies,
// per-trajectory log-ratio deviations, analytic gradients, Adam, and the
// diagnostics tying the surrogate gradients to their divergence counterparts.
#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ftb/divergence.hpp"
#include "ftb/hypergrid.hpp"
#include "ftb/rng.hpp"

namespace ftb {

enum class BackwardMode { uniform, learnable };
enum class Normalization { learnable_z, devgrad };

struct PolicyParams {
  // forward_logits[s * (d+1) + a]: logits over actions at state s; illegal
  // entries are masked out of every softmax and never receive gradient.
  std::vector<double> forward_logits;
  double log_z = 0.0;
  BackwardMode backward_mode = BackwardMode::uniform;
  // backward_logits[s * d + k]: logit of stepping back along dimension k at
  // state s; only dimensions with a positive coordinate are legal.
  std::vector<double> backward_logits;

  // Zero logits (uniform over allowed actions everywhere), log_z = 0.
  static PolicyParams uniform_init(const HypergridEnv& env, BackwardMode mode);
};

struct BehaviorPolicy {
  enum class Mode { on_policy, eps_uniform, tempered };
  Mode mode = Mode::on_policy;
  double eps = 0.0;          // eps_uniform: mixing weight of the uniform draw
  double temperature = 1.0;  // tempered: softmax temperature on the logits
};

// log pi_F(tau): sum of masked log-softmax terms along the trajectory.
double forward_trajectory_logprob(const PolicyParams& params, const HypergridEnv& env,
                                  const Trajectory& traj);

// log pi_B(tau | x): product over increment edges of the backward kernel at
// the child state (uniform over parents, or learnable softmax).
double backward_trajectory_logprob(const PolicyParams& params, const HypergridEnv& env,
                                   const Trajectory& traj);

// delta(tau) = log_z + log pi_F(tau) - log R(x_tau) - log pi_B(tau | x_tau).
double trajectory_delta(const PolicyParams& params, const HypergridEnv& env,
                        const Trajectory& traj);

// Draw one complete trajectory from the behavior policy; also returns the
// behavior log-probability of the draw (diagnostic; no importance weighting).
std::pair<Trajectory, double> sample_trajectory(const PolicyParams& params,
                                                const HypergridEnv& env,
                                                const BehaviorPolicy& behavior,
                                                Rng& rng);

struct BatchGradients {
  std::vector<double> d_forward;   // same shape as forward_logits
  double d_log_z = 0.0;            // learnable_z only
  std::vector<double> d_backward;  // same shape as backward_logits
  std::vector<double> deltas;      // the deviations that produced the weights
  double log_z_estimate = 0.0;     // batch normalizer (devgrad) or the parameter
  double mean_loss = 0.0;          // only filled when want_loss
};

// Analytic batch gradients of (1/B) sum_i w_i * delta_i's parents:
// learnable_z weights are loss derivatives of full deltas; devgrad weights come
// from the batch-normalized deviations and leave log_z untouched.
BatchGradients compute_batch_gradients(const PolicyParams& params,
                                       const HypergridEnv& env,
                                       const DivergenceSpec& spec,
                                       Normalization normalization,
                                       std::span<const Trajectory> batch,
                                       bool want_loss);

struct AdamParams {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double log_z_lr_multiplier = 10.0;
};

struct AdamState {
  std::vector<double> m_f, v_f;  // forward logits
  double m_z = 0.0, v_z = 0.0;   // log_z
  std::vector<double> m_b, v_b;  // backward logits
  std::int64_t t = 0;

  static AdamState init(const PolicyParams& params);
};

struct StepStats {
  double mean_loss = 0.0;      // only valid when want_loss was set
  double log_z_estimate = 0.0; // devgrad batch estimate, or the updated parameter
};

// One Adam step on a sampled batch. Throws numeric_error (with the batch's
// deviations in the message) if any gradient is non-finite.
StepStats train_step(PolicyParams& params, AdamState& adam, const HypergridEnv& env,
                     const DivergenceSpec& spec, Normalization normalization,
                     const AdamParams& adam_params, std::span<const Trajectory> batch,
                     bool want_loss);

// Exact terminal distribution of the forward policy by flow propagation in
// coordinate-sum order; sums to 1 within 1e-10 or throws.
std::vector<double> policy_terminal_distribution(const PolicyParams& params,
                                                 const HypergridEnv& env);

// sum_i |p_i - q_i|
double distribution_l1(std::span<const double> p, std::span<const double> q);
// Jensen-Shannon divergence (natural log) between two distributions.
double distribution_jsd(std::span<const double> p, std::span<const double> q);

// Max absolute component error between the expected surrogate gradient and the
// analytic divergence gradient, forward-logit side: E_{pi_F}[L'(delta) S(tau)]
// vs the gradient of D_f(pi_F || R pi_B / Z). Enumerates the state space.
double forward_gradient_match_error(const PolicyParams& params, const HypergridEnv& env,
                                    const DivergenceSpec& spec);

// Same on the backward side under the tilted measure q = R pi_B / Z:
// E_q[L'(delta) d(delta)/d(phi)] vs the gradient of D_h(q || pi_F).
// Requires learnable backward parameters.
double backward_gradient_match_error(const PolicyParams& params, const HypergridEnv& env,
                                     const DivergenceSpec& spec);

struct VarianceComparison {
  double var_weighted;  // per-sample gradient (f'(u) - 1) * score
  double var_score;     // per-sample gradient f'(u) * score
};

// Monte Carlo trace-variance of the two per-sample gradient estimators over
// n_samples on-policy draws, using log Z = log sum R as the normalizer.
VarianceComparison gradient_variance_comparison(const PolicyParams& params,
                                                const HypergridEnv& env,
                                                const DivergenceSpec& spec,
                                                int n_samples, std::uint64_t seed);

}  // namespace ftb
