#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sde/corpus.hpp"
#include "sde/eval.hpp"
#include "sde/executor.hpp"
#include "sde/metrics.hpp"

namespace sde {

/// One line of report.jsonl. Wall times are deliberately absent so that
/// reruns of the same configuration produce identical bytes; they live in
/// the run manifest instead.
struct TaskReport {
  std::string task_id;
  Difficulty difficulty = Difficulty::Unknown;
  bool ok = true;     // false when the task could not be scored at all
  std::string error;  // set when !ok, or when targets are missing
  int k = 0;
  int n = 0;
  bool uniqueness_shortfall = false;
  std::vector<std::vector<int>> clusters;  // member ranks, partition order
  int dominant_index = 0;
  UncertaintyScores scores;
  InputQuality quality;
  std::optional<CorrectnessTargets> targets;  // absent without reference tests

  bool operator==(const TaskReport&) const;
};

nlohmann::json task_report_to_json(const TaskReport& r);
/// Throws SchemaMismatch on missing or ill-typed keys.
TaskReport task_report_from_json(const nlohmann::json& j);

void write_report(const std::vector<TaskReport>& rows, const std::filesystem::path& path);
std::vector<TaskReport> read_report(const std::filesystem::path& path);

/// Rows usable for evaluation: scored and carrying correctness targets.
std::vector<TaskReport> labelled_rows(const std::vector<TaskReport>& rows);

double metric_value(const TaskReport& r, UncertaintyMetric m);

}  // namespace sde
