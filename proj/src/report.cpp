#include "sde/report.hpp"

#include <fstream>

#include "sde/error.hpp"

namespace sde {

using json = nlohmann::json;

bool TaskReport::operator==(const TaskReport& o) const {
  return task_report_to_json(*this) == task_report_to_json(o);
}

json task_report_to_json(const TaskReport& r) {
  json j;
  j["task_id"] = r.task_id;
  j["difficulty"] = to_string(r.difficulty);
  j["status"] = r.ok ? "ok" : "error";
  j["error"] = r.error.empty() ? json(nullptr) : json(r.error);
  j["k"] = r.k;
  j["n"] = r.n;
  j["uniqueness_shortfall"] = r.uniqueness_shortfall;
  j["clusters"] = r.clusters;
  j["cluster_sizes"] = json::array();
  for (const auto& c : r.clusters) j["cluster_sizes"].push_back(c.size());
  j["dominant_index"] = r.dominant_index;
  j["sde"] = r.scores.sde;
  j["dsde"] = r.scores.dsde;
  j["sc_entropy"] = r.scores.sc_entropy;
  j["diagnostics"] = {{"valid_exec_rate", r.quality.valid_exec_rate},
                      {"unique_input_rate", r.quality.unique_input_rate},
                      {"crash_pollution_rate", r.quality.crash_pollution_rate}};
  if (r.targets) {
    j["pass1"] = r.targets->pass1;
    j["partial_pass1"] = r.targets->partial_pass1;
  } else {
    j["pass1"] = nullptr;
    j["partial_pass1"] = nullptr;
  }
  return j;
}

TaskReport task_report_from_json(const json& j) {
  try {
    TaskReport r;
    r.task_id = j.at("task_id").get<std::string>();
    r.difficulty = parse_difficulty(j.at("difficulty").get<std::string>());
    const auto status = j.at("status").get<std::string>();
    if (status != "ok" && status != "error") throw Error(ErrorKind::SchemaMismatch, "bad status '" + status + "'");
    r.ok = status == "ok";
    if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
    r.k = j.at("k").get<int>();
    r.n = j.at("n").get<int>();
    r.uniqueness_shortfall = j.at("uniqueness_shortfall").get<bool>();
    r.clusters = j.at("clusters").get<std::vector<std::vector<int>>>();
    r.dominant_index = j.at("dominant_index").get<int>();
    r.scores = {j.at("sde").get<double>(), j.at("dsde").get<double>(), j.at("sc_entropy").get<double>()};
    const auto& d = j.at("diagnostics");
    r.quality = {d.at("valid_exec_rate").get<double>(), d.at("unique_input_rate").get<double>(),
                 d.at("crash_pollution_rate").get<double>()};
    if (!j.at("pass1").is_null()) {
      r.targets = CorrectnessTargets{j.at("pass1").get<bool>(), j.at("partial_pass1").get<double>()};
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaMismatch, std::string("report row: ") + e.what());
  }
}

void write_report(const std::vector<TaskReport>& rows, const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : rows) {
    out += task_report_to_json(r).dump();
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<TaskReport> read_report(const std::filesystem::path& path) {
  std::vector<TaskReport> rows;
  try {
    read_jsonl(path, [&](const json& j, std::size_t) { rows.push_back(task_report_from_json(j)); });
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ParseError) throw Error(ErrorKind::SchemaMismatch, e.what());
    throw;
  }
  return rows;
}

std::vector<TaskReport> labelled_rows(const std::vector<TaskReport>& rows) {
  std::vector<TaskReport> out;
  for (const auto& r : rows) {
    if (r.ok && r.targets) out.push_back(r);
  }
  return out;
}

double metric_value(const TaskReport& r, UncertaintyMetric m) {
  switch (m) {
    case UncertaintyMetric::SDE: return r.scores.sde;
    case UncertaintyMetric::DSDE: return r.scores.dsde;
    case UncertaintyMetric::SCEntropy: return r.scores.sc_entropy;
  }
  return r.scores.dsde;
}

}  // namespace sde
