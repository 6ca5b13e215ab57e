// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Reward-tilted sequence-level losses.

#include "ftb/llm.hpp"

#include <cmath>

#include "ftb/loss.hpp"
#include "ftb/num.hpp"

namespace ftb {

namespace {

void check_batch(const CompletionBatch& batch, const char* where) {
  const std::size_t n = batch.log_pi.size();
  if (n == 0) throw domain_error(std::string(where) + ": empty batch");
  if (batch.log_ref.size() != n || batch.reward.size() != n) {
    throw domain_error(std::string(where) + ": column length mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(batch.log_pi[i]) || !std::isfinite(batch.log_ref[i]) ||
        !std::isfinite(batch.reward[i])) {
      throw domain_error(std::string(where) + ": non-finite entry in batch");
    }
  }
}

void check_beta(double beta, const char* where) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw domain_error(std::string(where) + ": beta must be finite and positive");
  }
}

}  // namespace

std::vector<double> delta_from_logprobs(const CompletionBatch& batch, double beta,
                                        bool tempered) {
  check_batch(batch, "delta_from_logprobs");
  check_beta(beta, "delta_from_logprobs");
  std::vector<double> deltas(batch.log_pi.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double log_ratio = batch.log_pi[i] - batch.log_ref[i];
    deltas[i] = tempered ? beta * log_ratio - batch.reward[i]
                         : log_ratio - batch.reward[i] / beta;
  }
  return deltas;
}

DevGradResult tempered_devgrad_llm(const CompletionBatch& batch, double beta,
                                   const DivergenceSpec& spec_in, bool kimi_approx) {
  check_batch(batch, "tempered_devgrad_llm");
  check_beta(beta, "tempered_devgrad_llm");
  const DivergenceSpec spec = canonicalize(spec_in);
  if (kimi_approx && spec.kind != Divergence::reverse_kl) {
    throw config_error(
        "tempered_devgrad_llm: the mean-reward normalizer approximation is only "
        "valid for reverse_kl, got " +
        divergence_name(spec));
  }

  const std::vector<double> deltas = delta_from_logprobs(batch, beta, /*tempered=*/true);

  DevGradResult out;
  if (kimi_approx) {
    num::KahanSum acc;
    for (double r : batch.reward) acc.add(r);
    out.log_z_hat = acc.value() / static_cast<double>(batch.reward.size());
  } else {
    out.log_z_hat = estimate_log_z(spec, deltas);
  }

  // Scaling note: the 1/beta on the loss and the beta from d(delta)/d(log_pi)
  // cancel, so the per-sample weights are plain loss derivatives at the
  // centered tempered deviations.
  out.weights.resize(deltas.size());
  num::KahanSum loss_acc;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double centered = deltas[i] + out.log_z_hat;
    loss_acc.add(loss_eval(spec, centered));
    out.weights[i] = loss_deriv(spec, centered);
  }
  out.loss = loss_acc.value() / static_cast<double>(deltas.size()) / beta;
  return out;
}

}  // namespace ftb
