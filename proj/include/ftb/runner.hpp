// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Experiment runner: resolved training configuration, the metrics-producing
// training loop, byte-deterministic run outputs, and the sweep driver.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ftb/gfn.hpp"
#include "ftb/io.hpp"
#include "ftb/llm.hpp"

namespace ftb {

struct AlphaSchedule {
  bool enabled = false;
  double alpha_start = 1.0;
  double alpha_end = 1.0;
  std::int64_t anneal_steps = 0;  // steps to sweep start -> end, then hold
};

struct TrainConfig {
  int env_d = 2;
  int env_h = 8;
  double env_r0 = 0.001;
  DivergenceSpec spec = DivergenceSpec::named(Divergence::reverse_kl);
  AlphaSchedule schedule;
  BehaviorPolicy behavior;
  std::int64_t batch_size = 64;
  std::int64_t steps = 2000;
  double lr = 1e-2;
  double log_z_lr_multiplier = 10.0;
  Normalization normalization = Normalization::learnable_z;
  BackwardMode backward = BackwardMode::uniform;
  std::uint64_t seed = 1;
  std::int64_t eval_interval = 10;
};

// Builds and validates a TrainConfig from a flat config map (missing keys take
// the defaults above); throws config_error on unknown enum tokens or invalid
// numbers. Recognized keys: env.d, env.h, env.r0, divergence, alpha,
// alpha_start, alpha_end, anneal_steps, behavior.mode, behavior.eps,
// behavior.temperature, batch_size, steps, lr, log_z_lr_multiplier,
// normalization, backward, seed, eval_interval.
TrainConfig train_config_from_map(const io::ConfigMap& cfg);

// The divergence used at a given 1-based step under the alpha schedule.
DivergenceSpec spec_at_step(const TrainConfig& cfg, std::int64_t step);

struct MetricsRow {
  std::int64_t step = 0;
  std::int64_t trajectories = 0;
  double loss = 0.0;
  double log_z_estimate = 0.0;
  double l1 = 0.0;
  double jsd = 0.0;
  int modes_found = 0;
};

struct RunResult {
  std::vector<MetricsRow> rows;  // one per eval_interval steps
  int n_mode_regions = 0;
  std::int64_t trajectories_to_all_modes = -1;  // -1: never found them all
  PolicyParams params;                          // final parameters
};

// Full training loop: counter-based sampling streams keyed by (seed, step,
// sample), one Adam step per batch, metrics every eval_interval steps.
RunResult train_run(const TrainConfig& cfg);

// CSV/JSON run outputs. All floats are %.17g; no timestamps, so reruns of the
// same config are byte-identical.
std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string manifest_json(const TrainConfig& cfg, const std::string& config_hash);

// Writes metrics.csv and manifest.json into out_dir (created if needed).
void write_run_outputs(const TrainConfig& cfg, const RunResult& result,
                       const std::string& out_dir, const std::string& config_content);

struct SweepSpec {
  TrainConfig base;
  std::vector<DivergenceSpec> divergences;  // outer axis, in config order
  std::vector<std::uint64_t> seeds;         // inner axis
};

// Requires non-empty 'divergences' and 'seeds' list keys.
SweepSpec sweep_from_map(const io::ConfigMap& cfg);

struct SweepRow {
  std::string divergence;
  std::uint64_t seed = 0;
  std::string status;  // "ok" or "failed"
  std::int64_t trajectories_to_4_modes = -1;
  double final_jsd = 0.0;
  int final_modes = 0;
};

// Runs the Cartesian product on a pool of `jobs` worker threads (0 = one per
// hardware thread), one output directory per run, and writes summary.csv.
// A failed run is recorded with status "failed" and empty metric fields.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::string& out_dir,
                                int jobs, const std::string& config_content);

// Directory-safe token for a run: divergence name with ':' -> '_', plus seed.
std::string run_dir_name(const DivergenceSpec& spec, std::uint64_t seed);

// Parses a completion batch CSV with header log_pi,log_ref,reward.
CompletionBatch parse_completion_csv(const std::string& text);

}  // namespace ftb
