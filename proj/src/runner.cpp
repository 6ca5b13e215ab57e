// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// Runner implementation.

#include "ftb/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace ftb {

namespace {

using nlohmann::ordered_json;

void validate(const TrainConfig& cfg) {
  if (cfg.batch_size < 1) throw config_error("config: batch_size must be >= 1");
  if (cfg.steps < 1) throw config_error("config: steps must be >= 1");
  if (cfg.eval_interval < 1) throw config_error("config: eval_interval must be >= 1");
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) throw config_error("config: lr must be positive");
  if (!(cfg.log_z_lr_multiplier > 0.0) || !std::isfinite(cfg.log_z_lr_multiplier)) {
    throw config_error("config: log_z_lr_multiplier must be positive");
  }
  if (cfg.behavior.mode == BehaviorPolicy::Mode::eps_uniform &&
      !(cfg.behavior.eps >= 0.0 && cfg.behavior.eps <= 1.0)) {
    throw config_error("config: behavior.eps must lie in [0, 1]");
  }
  if (cfg.behavior.mode == BehaviorPolicy::Mode::tempered &&
      !(cfg.behavior.temperature > 0.0 && std::isfinite(cfg.behavior.temperature))) {
    throw config_error("config: behavior.temperature must be positive");
  }
  if (cfg.schedule.enabled) {
    if (cfg.spec.kind != Divergence::alpha) {
      throw config_error("config: alpha schedule requires divergence = alpha");
    }
    if (cfg.schedule.anneal_steps < 1) {
      throw config_error("config: anneal_steps must be >= 1");
    }
  }
}

BehaviorPolicy::Mode parse_behavior_mode(const std::string& token) {
  if (token == "on_policy") return BehaviorPolicy::Mode::on_policy;
  if (token == "eps_uniform") return BehaviorPolicy::Mode::eps_uniform;
  if (token == "tempered") return BehaviorPolicy::Mode::tempered;
  throw config_error("config: unknown behavior.mode '" + token + "'");
}

std::string behavior_mode_name(BehaviorPolicy::Mode mode) {
  switch (mode) {
    case BehaviorPolicy::Mode::on_policy: return "on_policy";
    case BehaviorPolicy::Mode::eps_uniform: return "eps_uniform";
    case BehaviorPolicy::Mode::tempered: return "tempered";
  }
  return "on_policy";
}

}  // namespace

TrainConfig train_config_from_map(const io::ConfigMap& cfg) {
  TrainConfig out;
  out.env_d = static_cast<int>(io::get_int(cfg, "env.d", out.env_d));
  out.env_h = static_cast<int>(io::get_int(cfg, "env.h", out.env_h));
  out.env_r0 = io::get_double(cfg, "env.r0", out.env_r0);

  const std::string div = io::get_string(cfg, "divergence", "reverse_kl");
  std::optional<double> alpha;
  if (io::has_key(cfg, "alpha")) alpha = io::get_double(cfg, "alpha", 0.0);
  if (io::has_key(cfg, "alpha_start") || io::has_key(cfg, "alpha_end")) {
    if (!io::has_key(cfg, "alpha_start") || !io::has_key(cfg, "alpha_end")) {
      throw config_error("config: alpha_start and alpha_end must be given together");
    }
    out.schedule.enabled = true;
    out.schedule.alpha_start = io::get_double(cfg, "alpha_start", 0.0);
    out.schedule.alpha_end = io::get_double(cfg, "alpha_end", 0.0);
    out.schedule.anneal_steps = io::get_int(cfg, "anneal_steps", 0);
    if (!alpha) alpha = out.schedule.alpha_start;
  }
  out.spec = parse_divergence(div, alpha);

  out.behavior.mode = parse_behavior_mode(io::get_string(cfg, "behavior.mode", "on_policy"));
  out.behavior.eps = io::get_double(cfg, "behavior.eps", 0.0);
  out.behavior.temperature = io::get_double(cfg, "behavior.temperature", 1.0);

  out.batch_size = io::get_int(cfg, "batch_size", out.batch_size);
  out.steps = io::get_int(cfg, "steps", out.steps);
  out.lr = io::get_double(cfg, "lr", out.lr);
  out.log_z_lr_multiplier = io::get_double(cfg, "log_z_lr_multiplier", out.log_z_lr_multiplier);

  const std::string norm = io::get_string(cfg, "normalization", "learnable_z");
  if (norm == "learnable_z") {
    out.normalization = Normalization::learnable_z;
  } else if (norm == "devgrad") {
    out.normalization = Normalization::devgrad;
  } else {
    throw config_error("config: unknown normalization '" + norm + "'");
  }

  const std::string backward = io::get_string(cfg, "backward", "uniform");
  if (backward == "uniform") {
    out.backward = BackwardMode::uniform;
  } else if (backward == "learnable") {
    out.backward = BackwardMode::learnable;
  } else {
    throw config_error("config: unknown backward '" + backward + "'");
  }

  out.seed = static_cast<std::uint64_t>(io::get_int(cfg, "seed", static_cast<std::int64_t>(out.seed)));
  out.eval_interval = io::get_int(cfg, "eval_interval", out.eval_interval);
  validate(out);
  return out;
}

DivergenceSpec spec_at_step(const TrainConfig& cfg, std::int64_t step) {
  if (!cfg.schedule.enabled) return cfg.spec;
  const double frac =
      cfg.schedule.anneal_steps <= 1
          ? 1.0
          : std::min(1.0, static_cast<double>(step - 1) /
                              static_cast<double>(cfg.schedule.anneal_steps - 1));
  return DivergenceSpec::alpha_family(cfg.schedule.alpha_start +
                                      (cfg.schedule.alpha_end - cfg.schedule.alpha_start) * frac);
}

RunResult train_run(const TrainConfig& cfg) {
  validate(cfg);
  const HypergridEnv env(cfg.env_d, cfg.env_h, cfg.env_r0);
  const std::vector<double> target = exact_target_distribution(env);
  const ModeRegions regions = mode_regions(env);

  RunResult result;
  result.n_mode_regions = regions.n_regions;
  result.params = PolicyParams::uniform_init(env, cfg.backward);
  AdamState adam = AdamState::init(result.params);
  AdamParams adam_params;
  adam_params.lr = cfg.lr;
  adam_params.log_z_lr_multiplier = cfg.log_z_lr_multiplier;

  std::vector<char> region_found(std::max(regions.n_regions, 1), 0);
  int found_count = 0;
  std::int64_t trajectories = 0;

  std::vector<Trajectory> batch(cfg.batch_size);
  for (std::int64_t step = 1; step <= cfg.steps; ++step) {
    for (std::int64_t i = 0; i < cfg.batch_size; ++i) {
      Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(step),
                               static_cast<std::uint64_t>(i));
      batch[i] = sample_trajectory(result.params, env, cfg.behavior, rng).first;
      ++trajectories;
      const int region = regions.region_of[batch[i].states.back()];
      if (region >= 0 && !region_found[region]) {
        region_found[region] = 1;
        ++found_count;
        if (found_count == regions.n_regions && result.trajectories_to_all_modes < 0) {
          result.trajectories_to_all_modes = trajectories;
        }
      }
    }
    const bool eval_now = (step % cfg.eval_interval == 0);
    const StepStats stats =
        train_step(result.params, adam, env, spec_at_step(cfg, step), cfg.normalization,
                   adam_params, batch, /*want_loss=*/eval_now);
    if (eval_now) {
      const std::vector<double> p = policy_terminal_distribution(result.params, env);
      MetricsRow row;
      row.step = step;
      row.trajectories = trajectories;
      row.loss = stats.mean_loss;
      row.log_z_estimate = stats.log_z_estimate;
      row.l1 = distribution_l1(p, target);
      row.jsd = distribution_jsd(p, target);
      row.modes_found = found_count;
      result.rows.push_back(row);
    }
  }
  return result;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = io::csv_join(
      {"step", "trajectories", "loss", "log_z_estimate", "l1", "jsd", "modes_found"});
  for (const MetricsRow& r : rows) {
    out += io::csv_join({std::to_string(r.step), std::to_string(r.trajectories),
                         io::format_float(r.loss), io::format_float(r.log_z_estimate),
                         io::format_float(r.l1), io::format_float(r.jsd),
                         std::to_string(r.modes_found)});
  }
  return out;
}

std::string manifest_json(const TrainConfig& cfg, const std::string& config_hash) {
  ordered_json j;
  j["config"] = {
      {"env", {{"d", cfg.env_d}, {"h", cfg.env_h}, {"r0", cfg.env_r0}}},
      {"divergence", divergence_name(cfg.spec)},
      {"alpha_schedule",
       cfg.schedule.enabled
           ? ordered_json({{"alpha_start", cfg.schedule.alpha_start},
                           {"alpha_end", cfg.schedule.alpha_end},
                           {"anneal_steps", cfg.schedule.anneal_steps}})
           : ordered_json(nullptr)},
      {"behavior",
       {{"mode", behavior_mode_name(cfg.behavior.mode)},
        {"eps", cfg.behavior.eps},
        {"temperature", cfg.behavior.temperature}}},
      {"batch_size", cfg.batch_size},
      {"steps", cfg.steps},
      {"lr", cfg.lr},
      {"log_z_lr_multiplier", cfg.log_z_lr_multiplier},
      {"normalization",
       cfg.normalization == Normalization::learnable_z ? "learnable_z" : "devgrad"},
      {"backward", cfg.backward == BackwardMode::uniform ? "uniform" : "learnable"},
      {"seed", cfg.seed},
      {"eval_interval", cfg.eval_interval},
  };
  j["config_hash"] = config_hash;
  return j.dump(2) + "\n";
}

void write_run_outputs(const TrainConfig& cfg, const RunResult& result,
                       const std::string& out_dir, const std::string& config_content) {
  const std::filesystem::path dir(out_dir);
  io::write_file((dir / "metrics.csv").string(), metrics_csv(result.rows));
  io::write_file((dir / "manifest.json").string(),
                 manifest_json(cfg, io::git_blob_hash(config_content)));
}

SweepSpec sweep_from_map(const io::ConfigMap& cfg) {
  SweepSpec spec;
  io::ConfigMap base = cfg;
  base.erase("divergences");
  base.erase("seeds");
  spec.base = train_config_from_map(base);

  const std::string divs = io::get_string(cfg, "divergences", "");
  for (const std::string& token : io::split_list(divs)) {
    spec.divergences.push_back(parse_divergence(token));
  }
  if (spec.divergences.empty()) {
    throw config_error("sweep config: 'divergences' must list at least one divergence");
  }
  const std::string seeds = io::get_string(cfg, "seeds", "");
  for (const std::string& token : io::split_list(seeds)) {
    try {
      spec.seeds.push_back(static_cast<std::uint64_t>(std::stoull(token)));
    } catch (const std::exception&) {
      throw config_error("sweep config: bad seed '" + token + "'");
    }
  }
  if (spec.seeds.empty()) {
    throw config_error("sweep config: 'seeds' must list at least one seed");
  }
  return spec;
}

std::string run_dir_name(const DivergenceSpec& spec, std::uint64_t seed) {
  std::string name = divergence_name(spec);
  for (char& c : name) {
    if (c == ':') c = '_';
  }
  return name + "_seed" + std::to_string(seed);
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::string& out_dir,
                                int jobs, const std::string& config_content) {
  struct Job {
    TrainConfig cfg;
    std::string dir;
    SweepRow row;
  };
  std::vector<Job> all;
  for (const DivergenceSpec& div : spec.divergences) {
    for (std::uint64_t seed : spec.seeds) {
      Job job;
      job.cfg = spec.base;
      job.cfg.spec = div;
      job.cfg.seed = seed;
      job.dir = (std::filesystem::path(out_dir) / run_dir_name(div, seed)).string();
      job.row.divergence = divergence_name(div);
      job.row.seed = seed;
      all.push_back(std::move(job));
    }
  }

  int n_threads = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(all.size())));

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= all.size()) return;
      Job& job = all[idx];
      try {
        const RunResult res = train_run(job.cfg);
        write_run_outputs(job.cfg, res, job.dir, config_content);
        job.row.status = "ok";
        job.row.trajectories_to_4_modes = res.trajectories_to_all_modes;
        if (!res.rows.empty()) {
          job.row.final_jsd = res.rows.back().jsd;
          job.row.final_modes = res.rows.back().modes_found;
        }
      } catch (const std::exception& e) {
        job.row.status = "failed";
        io::write_file((std::filesystem::path(job.dir) / "error.txt").string(),
                       std::string(e.what()) + "\n");
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  std::string summary = io::csv_join(
      {"divergence", "seed", "status", "trajectories_to_4_modes", "final_jsd", "final_modes"});
  std::vector<SweepRow> rows;
  rows.reserve(all.size());
  for (const Job& job : all) {
    if (job.row.status == "ok") {
      summary += io::csv_join({job.row.divergence, std::to_string(job.row.seed), job.row.status,
                               std::to_string(job.row.trajectories_to_4_modes),
                               io::format_float(job.row.final_jsd),
                               std::to_string(job.row.final_modes)});
    } else {
      summary += io::csv_join(
          {job.row.divergence, std::to_string(job.row.seed), job.row.status, "", "", ""});
    }
    rows.push_back(job.row);
  }
  io::write_file((std::filesystem::path(out_dir) / "summary.csv").string(), summary);
  return rows;
}

CompletionBatch parse_completion_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw domain_error("completion csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "log_pi,log_ref,reward") {
    throw domain_error("completion csv: expected header 'log_pi,log_ref,reward', got '" +
                       line + "'");
  }
  CompletionBatch batch;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = io::split_list(line);
    if (fields.size() != 3) {
      throw domain_error("completion csv: expected 3 fields at line " + std::to_string(line_no));
    }
    try {
      batch.log_pi.push_back(std::stod(fields[0]));
      batch.log_ref.push_back(std::stod(fields[1]));
      batch.reward.push_back(std::stod(fields[2]));
    } catch (const std::exception&) {
      throw domain_error("completion csv: bad number at line " + std::to_string(line_no));
    }
  }
  if (batch.log_pi.empty()) throw domain_error("completion csv: no data rows");
  return batch;
}

}  // namespace ftb
