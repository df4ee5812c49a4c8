#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sde/corpus.hpp"

namespace sde {

struct ErrorType {
  enum class Kind { Timeout, RuntimeError, NonzeroExit, OutputDecodeError, SandboxFailure };

  Kind kind = Kind::RuntimeError;
  std::string class_name;  // RuntimeError only: coarse class, never message text
  int code = 0;            // NonzeroExit only

  static ErrorType timeout() { return {Kind::Timeout, {}, 0}; }
  static ErrorType runtime(std::string class_name) { return {Kind::RuntimeError, std::move(class_name), 0}; }
  static ErrorType nonzero_exit(int code) { return {Kind::NonzeroExit, {}, code}; }
  static ErrorType decode_error() { return {Kind::OutputDecodeError, {}, 0}; }
  static ErrorType sandbox_failure() { return {Kind::SandboxFailure, {}, 0}; }

  /// "Timeout", "RuntimeError:ValueError", "NonzeroExit:1", ...
  std::string label() const;
  static ErrorType from_label(std::string_view label);

  bool operator==(const ErrorType&) const = default;
};

struct NormalOutput {
  std::string canonical;
  bool operator==(const NormalOutput&) const = default;
};

/// Result of one (candidate, input) cell. Equality is behavioural: wall
/// time is ignored.
struct Outcome {
  std::variant<NormalOutput, ErrorType> kind;
  std::int64_t wall_time_ms = 0;

  static Outcome normal(std::string canonical, std::int64_t ms = 0) { return {NormalOutput{std::move(canonical)}, ms}; }
  static Outcome abnormal(ErrorType e, std::int64_t ms = 0) { return {std::move(e), ms}; }

  bool is_normal() const { return std::holds_alternative<NormalOutput>(kind); }
  const std::string& output() const { return std::get<NormalOutput>(kind).canonical; }
  const ErrorType& error() const { return std::get<ErrorType>(kind); }

  bool operator==(const Outcome& other) const { return kind == other.kind; }
};

struct ExecutionSignature {
  std::string task_id;
  int rank = 1;
  std::vector<Outcome> outcomes;  // one per input, input order
};

/// Componentwise behavioural equality of two outcome vectors.
bool same_behaviour(const ExecutionSignature& a, const ExecutionSignature& b);

nlohmann::json outcome_to_json(const Outcome& o);
Outcome outcome_from_json(const nlohmann::json& j);
nlohmann::json signatures_to_json(const std::vector<ExecutionSignature>& sigs);
std::vector<ExecutionSignature> signatures_from_json(const nlohmann::json& j);

struct ExecConfig {
  int timeout_ms_per_input = 200;
  int max_parallel_workers = 1;
  std::optional<int> memory_cap_mb;
  std::filesystem::path shim_path;
  /// Interpreter used when shim_path is a .py file.
  std::vector<std::string> python_command{"python3"};
  std::string cxx_compiler = "g++";
  int compile_timeout_ms = 60'000;

  void validate() const;
};

/// Stage-3 backend: one signature per candidate over a shared input set.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual std::vector<ExecutionSignature> execute_all(const Task& task,
                                                      const std::vector<CandidateProgram>& candidates,
                                                      const std::vector<InputValue>& inputs) = 0;
};

/// Runs candidates in child processes. Python candidates are driven through
/// the JSON-lines shim; C++ and Java stdin programs are compiled once and
/// run once per input. The per-input timeout is enforced here by killing
/// the child's process group.
class SubprocessExecutor final : public Executor {
 public:
  explicit SubprocessExecutor(ExecConfig config);

  std::vector<ExecutionSignature> execute_all(const Task& task, const std::vector<CandidateProgram>& candidates,
                                              const std::vector<InputValue>& inputs) override;

  /// Cells of a single candidate, run sequentially.
  std::vector<Outcome> run_candidate(const Task& task, const CandidateProgram& candidate,
                                     const std::vector<InputValue>& inputs) const;

 private:
  ExecConfig config_;
};

/// Replays recorded signatures instead of running anything. A recording is
/// keyed on (task_id, exact input set), so fuzz-input and reference-test
/// runs of one task are kept apart. Candidates without a recording get
/// SandboxFailure cells.
class ReplayExecutor final : public Executor {
 public:
  ReplayExecutor() = default;
  /// Loads every *.json recording in `dir` (see recording_to_json).
  explicit ReplayExecutor(const std::filesystem::path& dir);

  void load_dir(const std::filesystem::path& dir);
  void load(const nlohmann::json& recording);
  void record(const std::string& task_id, const std::vector<InputValue>& inputs, std::vector<ExecutionSignature> sigs);
  /// Wildcard: replayed for any input set of matching length.
  void record(const std::string& task_id, std::vector<ExecutionSignature> sigs);

  std::vector<ExecutionSignature> execute_all(const Task& task, const std::vector<CandidateProgram>& candidates,
                                              const std::vector<InputValue>& inputs) override;

 private:
  std::map<std::pair<std::string, std::string>, std::vector<ExecutionSignature>> exact_;
  std::map<std::string, std::vector<ExecutionSignature>> any_;
};

/// {"task_id", "inputs", "signatures"}: the on-disk form ReplayExecutor reads.
nlohmann::json recording_to_json(const std::string& task_id, const std::vector<InputValue>& inputs,
                                 const std::vector<ExecutionSignature>& sigs);

std::vector<ExecutionSignature> execute_all(const Task& task, const std::vector<CandidateProgram>& candidates,
                                            const std::vector<InputValue>& inputs, const ExecConfig& config);

/// Canonical form of a shim "output" member: function tasks canonicalise
/// the JSON value, stdin tasks the decoded text.
std::string canonical_from_wire(std::string_view raw_output_json, bool stdin_task);

/// Canonical form of a reference-test expectation, comparable to outcomes.
std::string canonical_expected(const nlohmann::json& expected, bool stdin_task);

struct InputQuality {
  double valid_exec_rate = 0;
  double unique_input_rate = 0;
  double crash_pollution_rate = 0;
};

/// Input-validity diagnostics. Any abnormal cell counts as a crash.
InputQuality diagnostics(const std::vector<ExecutionSignature>& signatures, const std::vector<InputValue>& inputs);

}  // namespace sde
