#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sde/eval.hpp"
#include "sde/pipeline.hpp"
#include "sde/report.hpp"
#include "sde/sampler.hpp"

namespace sde {

/// Process exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitFatal = 1, kExitPartial = 2 };

/// "1.0,0.8,0.6" -> weights; throws InvalidArgument.
DistanceWeights parse_weights(std::string_view text);

struct RunOptions {
  std::filesystem::path corpus_dir;
  std::filesystem::path out_dir;  // report.jsonl, manifest.json, cache/
  PipelineConfig pipeline;
  ExecConfig exec;
  /// Replay cache/ from an earlier run instead of executing anything.
  std::optional<std::filesystem::path> replay_dir;
};

/// Stages 2-4 over a corpus. Returns the exit code; per-task failures are
/// recorded in the report and give kExitPartial.
int cmd_run(const RunOptions& options, std::ostream& log);

/// The run manifest written next to the report.
nlohmann::json run_manifest(const RunOptions& options, const RunResult& result);

struct EvalOptions {
  std::filesystem::path report;
  double fpr_cap = 0.05;
  int folds = 5;
  std::uint64_t split_seed = 0;
  UncertaintyMetric abstention_metric = UncertaintyMetric::DSDE;
  /// signatures/ cache; enables the weight-learning block.
  std::optional<std::filesystem::path> signatures_dir;
  double split_ratio = 0.8;
};

/// Global and per-difficulty statistics for SDE, DSDE and the
/// self-consistency entropy, plus abstention and weight-learning blocks.
nlohmann::json eval_summary(const std::vector<TaskReport>& rows, const EvalOptions& options);

/// Abstention calibration over labelled report rows.
nlohmann::json calibrate_summary(const std::vector<TaskReport>& rows, UncertaintyMetric metric, double fpr_cap,
                                 int folds, std::uint64_t split_seed);

/// Deterministic train/test split, weight search on train, AUROC of the
/// learned and default weights on test.
nlohmann::json learn_weights_summary(const std::vector<TaskReport>& rows,
                                     const std::map<std::string, ClusterPartition>& partitions, double split_ratio,
                                     std::uint64_t split_seed, int grid_steps = 20);

struct SampleOptions {
  std::filesystem::path tasks_file;  // tasks.jsonl
  std::filesystem::path out_dir;     // tasks.jsonl, candidates.jsonl, archive/
  SamplerConfig sampler;
};

int cmd_sample(const SampleOptions& options, std::ostream& log);

}  // namespace sde
