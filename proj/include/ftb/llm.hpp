// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Sequence-level losses for reward-tilted language-model fine-tuning, built on
// the deviation-gradient objective over per-completion log-ratios.
#pragma once

#include <vector>

#include "ftb/devgrad.hpp"
#include "ftb/divergence.hpp"

namespace ftb {

// One scalar per completion; all three vectors must have equal nonzero length.
struct CompletionBatch {
  std::vector<double> log_pi;   // policy sequence log-probabilities
  std::vector<double> log_ref;  // reference sequence log-probabilities
  std::vector<double> reward;   // scalar rewards
};

// tempered = false: d_i = (log_pi - log_ref) - r_i / beta  (target-side temper)
// tempered = true:  d_i = beta (log_pi - log_ref) - r_i    (loss-side temper)
std::vector<double> delta_from_logprobs(const CompletionBatch& batch, double beta,
                                        bool tempered);

// Tempered deviation-gradient objective: devgrad loss of the tempered
// deviations, divided by beta. With kimi_approx the log-normalizer is replaced
// by the mean reward, valid only for ReverseKL (config_error otherwise);
// the two estimates coincide when log_pi == log_ref.
DevGradResult tempered_devgrad_llm(const CompletionBatch& batch, double beta,
                                   const DivergenceSpec& spec, bool kimi_approx);

}  // namespace ftb
