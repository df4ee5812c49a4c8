// sde: execution-based uncertainty scores for sampled programs.
#include <iostream>

#include <CLI11.hpp>

#include "sde/commands.hpp"
#include "sde/error.hpp"

namespace {

void write_json(const nlohmann::json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    sde::write_text_file(out, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Execution-based semantic uncertainty for sampled programs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sde::kVersion);

  // run
  sde::RunOptions run;
  std::string weights = "1.0,0.8,0.6";
  std::string mode = "seeded";
  std::string replay;
  int memory_mb = 0;
  auto* run_cmd = app.add_subcommand("run", "fuzz, execute, cluster and score every task in a corpus");
  run_cmd->add_option("--corpus", run.corpus_dir, "directory with tasks.jsonl and candidates.jsonl")->required();
  run_cmd->add_option("--out", run.out_dir, "output directory")->required();
  run_cmd->add_option("--k", run.pipeline.k, "candidates per task")->capture_default_str();
  run_cmd->add_option("--n", run.pipeline.fuzz.n_inputs, "fuzz inputs per task")->capture_default_str();
  run_cmd->add_option("--timeout-ms", run.exec.timeout_ms_per_input, "per-input timeout")->capture_default_str();
  run_cmd->add_option("--weights", weights, "a,b,c graded disagreement costs")->capture_default_str();
  run_cmd->add_option("--mode", mode, "seeded | seed-free")->capture_default_str();
  run_cmd->add_option("--fuzz-seed", run.pipeline.fuzz.rng_seed, "fuzzing rng seed")->capture_default_str();
  run_cmd->add_option("--jobs", run.pipeline.jobs, "tasks processed concurrently")->capture_default_str();
  run_cmd->add_option("--workers", run.exec.max_parallel_workers, "candidates executed concurrently per task")
      ->capture_default_str();
  run_cmd->add_option("--shim", run.exec.shim_path, "python execution driver");
  run_cmd->add_option("--memory-mb", memory_mb, "address-space cap per child (0 = none)");
  run_cmd->add_option("--replay", replay, "cache directory of an earlier run to replay instead of executing");

  // eval
  sde::EvalOptions eval;
  std::string eval_out;
  std::string eval_metric = "dsde";
  std::string eval_signatures;
  auto* eval_cmd = app.add_subcommand("eval", "AUROC / Pearson / Spearman summary of a report");
  eval_cmd->add_option("--report", eval.report, "report.jsonl")->required();
  eval_cmd->add_option("--out", eval_out, "summary file (default stdout)");
  eval_cmd->add_option("--fpr-cap", eval.fpr_cap)->capture_default_str();
  eval_cmd->add_option("--folds", eval.folds)->capture_default_str();
  eval_cmd->add_option("--split-seed", eval.split_seed)->capture_default_str();
  eval_cmd->add_option("--metric", eval_metric, "metric for the abstention block")->capture_default_str();
  eval_cmd->add_option("--signatures", eval_signatures, "signatures cache; adds the weight-learning block");
  eval_cmd->add_option("--split-ratio", eval.split_ratio)->capture_default_str();

  // calibrate
  std::string cal_report, cal_out, cal_metric = "dsde";
  double cal_cap = 0.05;
  int cal_folds = 5;
  std::uint64_t cal_seed = 0;
  auto* cal_cmd = app.add_subcommand("calibrate", "fit an abstention threshold under an FPR cap");
  cal_cmd->add_option("--report", cal_report)->required();
  cal_cmd->add_option("--out", cal_out);
  cal_cmd->add_option("--metric", cal_metric)->capture_default_str();
  cal_cmd->add_option("--fpr-cap", cal_cap)->capture_default_str();
  cal_cmd->add_option("--folds", cal_folds)->capture_default_str();
  cal_cmd->add_option("--split-seed", cal_seed)->capture_default_str();

  // learn-weights
  std::string lw_report, lw_signatures, lw_out;
  double lw_ratio = 0.8;
  std::uint64_t lw_seed = 0;
  int lw_steps = 20;
  auto* lw_cmd = app.add_subcommand("learn-weights", "grid-search (a, b, c) on a train split");
  lw_cmd->add_option("--report", lw_report)->required();
  lw_cmd->add_option("--signatures", lw_signatures, "cache/signatures of the run")->required();
  lw_cmd->add_option("--out", lw_out);
  lw_cmd->add_option("--split-ratio", lw_ratio)->capture_default_str();
  lw_cmd->add_option("--split-seed", lw_seed)->capture_default_str();
  lw_cmd->add_option("--grid-steps", lw_steps, "grid points per unit")->capture_default_str();

  // sample
  sde::SampleOptions sample;
  auto* sample_cmd = app.add_subcommand("sample", "sample K candidates per task from a chat-completions endpoint");
  sample_cmd->add_option("--tasks", sample.tasks_file, "tasks.jsonl")->required();
  sample_cmd->add_option("--out", sample.out_dir)->required();
  sample_cmd->add_option("--endpoint", sample.sampler.endpoint_url)->capture_default_str();
  sample_cmd->add_option("--model", sample.sampler.model_name)->capture_default_str();
  sample_cmd->add_option("--k", sample.sampler.k_samples)->capture_default_str();
  sample_cmd->add_option("--temperature", sample.sampler.temperature)->capture_default_str();
  sample_cmd->add_option("--max-tokens", sample.sampler.max_tokens)->capture_default_str();
  sample_cmd->add_option("--api-key-env", sample.sampler.api_key_env_var)->capture_default_str();
  sample_cmd->add_option("--request-timeout-ms", sample.sampler.request_timeout_ms)->capture_default_str();
  sample_cmd->add_option("--retry-limit", sample.sampler.retry_limit)->capture_default_str();
  std::string prompt_file;
  sample_cmd->add_option("--prompt-template", prompt_file, "file with {description}/{entry_name}/{language}");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? sde::kExitOk : sde::kExitFatal;
  }

  try {
    if (*run_cmd) {
      run.pipeline.weights = sde::parse_weights(weights);
      run.pipeline.fuzz.mode = sde::parse_fuzz_mode(mode);
      if (memory_mb > 0) run.exec.memory_cap_mb = memory_mb;
      if (!replay.empty()) run.replay_dir = replay;
      return sde::cmd_run(run, std::cerr);
    }
    if (*eval_cmd) {
      eval.abstention_metric = sde::parse_metric(eval_metric);
      if (!eval_signatures.empty()) eval.signatures_dir = eval_signatures;
      write_json(sde::eval_summary(sde::read_report(eval.report), eval), eval_out);
      return sde::kExitOk;
    }
    if (*cal_cmd) {
      write_json(sde::calibrate_summary(sde::read_report(cal_report), sde::parse_metric(cal_metric), cal_cap,
                                        cal_folds, cal_seed),
                 cal_out);
      return sde::kExitOk;
    }
    if (*lw_cmd) {
      write_json(sde::learn_weights_summary(sde::read_report(lw_report), sde::load_partitions(lw_signatures),
                                            lw_ratio, lw_seed, lw_steps),
                 lw_out);
      return sde::kExitOk;
    }
    if (*sample_cmd) {
      if (!prompt_file.empty()) sample.sampler.prompt_template = sde::read_text_file(prompt_file);
      return sde::cmd_sample(sample, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sde::kExitFatal;
  }
  return sde::kExitFatal;
}
