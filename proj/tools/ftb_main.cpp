// Copyright (c) 2026 ftb authors
// SPDX-License-Identifier: Apache-2.0
// ftb command line: verify suites, single training runs, divergence sweeps,
// and completion-batch loss evaluation.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ftb/io.hpp"
#include "ftb/runner.hpp"
#include "ftb/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

int cmd_verify(const std::string& suite, const std::string& out_path) {
  const std::vector<ftb::CheckResult> checks = ftb::verify_suite(suite);
  const std::string report = ftb::report_json(suite, checks);
  std::cout << report;
  if (!out_path.empty()) ftb::io::write_file(out_path, report);
  for (const ftb::CheckResult& c : checks) {
    if (!c.pass) return kExitFailure;
  }
  return kExitOk;
}

// Seed precedence: FTB_SEED environment variable, then --seed, then config.
std::uint64_t resolve_seed(std::uint64_t config_seed, std::optional<std::uint64_t> flag_seed) {
  std::uint64_t seed = flag_seed.value_or(config_seed);
  if (const char* env = std::getenv("FTB_SEED")) {
    try {
      seed = std::stoull(env);
    } catch (const std::exception&) {
      throw ftb::config_error(std::string("FTB_SEED: bad value '") + env + "'");
    }
  }
  return seed;
}

int cmd_train(const std::string& config_path, std::optional<std::uint64_t> flag_seed,
              const std::string& out_dir) {
  const std::string config_content = ftb::io::read_file(config_path);
  ftb::TrainConfig cfg = ftb::train_config_from_map(ftb::io::parse_config_text(config_content));
  cfg.seed = resolve_seed(cfg.seed, flag_seed);
  const ftb::RunResult result = ftb::train_run(cfg);
  ftb::write_run_outputs(cfg, result, out_dir, config_content);
  std::cout << "wrote " << (std::filesystem::path(out_dir) / "metrics.csv").string() << " ("
            << result.rows.size() << " rows)\n";
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int jobs) {
  const std::string config_content = ftb::io::read_file(config_path);
  const ftb::SweepSpec spec = ftb::sweep_from_map(ftb::io::parse_config_text(config_content));
  const std::vector<ftb::SweepRow> rows = ftb::run_sweep(spec, out_dir, jobs, config_content);
  int failed = 0;
  for (const ftb::SweepRow& row : rows) {
    if (row.status != "ok") ++failed;
  }
  std::cout << "wrote " << (std::filesystem::path(out_dir) / "summary.csv").string() << " ("
            << rows.size() << " runs, " << failed << " failed)\n";
  return failed == 0 ? kExitOk : kExitFailure;
}

int cmd_llm_eval(const std::string& csv_path, const std::string& divergence,
                 std::optional<double> alpha, double beta, bool tempered, bool kimi) {
  const ftb::DivergenceSpec spec = ftb::parse_divergence(divergence, alpha);
  if (kimi && !tempered) {
    throw ftb::config_error("llm-eval: --kimi applies to the tempered objective; add --tempered");
  }
  const ftb::CompletionBatch batch =
      ftb::parse_completion_csv(ftb::io::read_file(csv_path));
  ftb::DevGradResult result;
  if (tempered) {
    result = ftb::tempered_devgrad_llm(batch, beta, spec, kimi);
  } else {
    const std::vector<double> deltas =
        ftb::delta_from_logprobs(batch, beta, /*tempered=*/false);
    result = ftb::devgrad_batch_loss(spec, deltas);
  }
  std::cout << "loss,log_z_hat\n"
            << ftb::io::format_float(result.loss) << ","
            << ftb::io::format_float(result.log_z_hat) << "\n"
            << "index,weight\n";
  for (std::size_t i = 0; i < result.weights.size(); ++i) {
    std::cout << i << "," << ftb::io::format_float(result.weights[i]) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"f-divergence trajectory-balance toolkit"};
  app.require_subcommand(1);

  std::string suite = "all";
  std::string verify_out;
  CLI::App* verify = app.add_subcommand("verify", "run a numerical self-check suite");
  verify->add_option("--suite", suite, "losses|devgrad|gradients|inverse|variance|all");
  verify->add_option("--out", verify_out, "also write the JSON report to this file");

  std::string train_config;
  std::string train_out = "run";
  std::optional<std::uint64_t> train_seed;
  CLI::App* train = app.add_subcommand("train", "single training run");
  train->add_option("--config", train_config, "config file (key=value or JSON)")->required();
  train->add_option("--seed", train_seed, "override the config seed");
  train->add_option("--out", train_out, "output directory");

  std::string sweep_config;
  std::string sweep_out = "sweep";
  int sweep_jobs = 0;
  CLI::App* sweep = app.add_subcommand("sweep", "divergences x seeds sweep");
  sweep->add_option("--config", sweep_config, "sweep config file")->required();
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--jobs", sweep_jobs, "worker threads (0 = all hardware threads)");

  std::string llm_csv;
  std::string llm_divergence;
  std::optional<double> llm_alpha;
  double llm_beta = 1.0;
  bool llm_tempered = false;
  bool llm_kimi = false;
  CLI::App* llm = app.add_subcommand("llm-eval", "completion-batch loss and weights");
  llm->add_option("--csv", llm_csv, "batch CSV with header log_pi,log_ref,reward")->required();
  llm->add_option("--divergence", llm_divergence, "divergence name")->required();
  llm->add_option("--alpha", llm_alpha, "alpha value for the alpha family");
  llm->add_option("--beta", llm_beta, "inverse temperature")->required();
  llm->add_flag("--tempered", llm_tempered, "loss-side tempering");
  llm->add_flag("--kimi", llm_kimi, "mean-reward normalizer approximation (reverse_kl only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (verify->parsed()) return cmd_verify(suite, verify_out);
    if (train->parsed()) return cmd_train(train_config, train_seed, train_out);
    if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_out, sweep_jobs);
    if (llm->parsed()) {
      return cmd_llm_eval(llm_csv, llm_divergence, llm_alpha, llm_beta, llm_tempered, llm_kimi);
    }
  } catch (const ftb::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitConfig;
}
