#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sde/clustering.hpp"
#include "sde/corpus.hpp"
#include "sde/executor.hpp"
#include "sde/fuzzgen.hpp"
#include "sde/metrics.hpp"
#include "sde/report.hpp"

namespace sde {

inline constexpr const char* kVersion = "0.1.0";

struct PipelineConfig {
  int k = 10;  // candidates per task, ranks 1..k
  FuzzConfig fuzz;
  DistanceWeights weights;
  int jobs = 1;  // tasks in flight
  /// When set, inputs/, signatures/ and reference/ caches are written here.
  std::filesystem::path cache_dir;

  void validate() const;
};

/// Milliseconds spent per stage, summed over tasks.
struct StageTimings {
  double sampling_ms = 0;
  double fuzzing_ms = 0;
  double execution_ms = 0;
  double metric_ms = 0;

  StageTimings& operator+=(const StageTimings& o);
  nlohmann::json to_json() const;
};

struct RunResult {
  std::vector<TaskReport> rows;  // corpus task order
  StageTimings timings;
  double wall_ms = 0;

  int errored_tasks() const;
};

/// Stages 2-4 for one task. Never throws for per-task problems: they come
/// back as a row with ok = false.
TaskReport run_task(const Task& task, const std::vector<CandidateProgram>& candidates, const PipelineConfig& config,
                    Executor& executor, StageTimings* timings = nullptr);

RunResult run_pipeline(const Corpus& corpus, const PipelineConfig& config, Executor& executor);

/// File-system-safe name for per-task cache files.
std::string cache_file_name(std::string_view task_id);

/// Partitions rebuilt from a signatures/ cache, keyed by task id.
std::map<std::string, ClusterPartition> load_partitions(const std::filesystem::path& signatures_dir);

nlohmann::json fuzz_config_to_json(const FuzzConfig& c);
nlohmann::json exec_config_to_json(const ExecConfig& c);

}  // namespace sde
