#include "sde/executor.hpp"

#include <signal.h>

#include <algorithm>
#include <atomic>
#include <regex>
#include <set>
#include <thread>
#include <unordered_set>

#include "process.hpp"
#include "sde/error.hpp"
#include "sde/fuzzgen.hpp"
#include "sde/normalize.hpp"

namespace sde {

using nlohmann::json;
using detail::Clock;
using detail::Subprocess;

namespace {

std::int64_t elapsed_ms(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();
}

ErrorType from_exit(const detail::ExitStatus& st) {
  if (st.exited) return st.code == 0 ? ErrorType::sandbox_failure() : ErrorType::nonzero_exit(st.code);
  return ErrorType::nonzero_exit(128 + st.code);
}

std::vector<Outcome> replicate(const ErrorType& e, std::size_t n) {
  return std::vector<Outcome>(n, Outcome::abnormal(e));
}

bool is_candidate_level(std::string_view error_type) {
  return error_type == "LoadError" || error_type == "EntryPointNotFound";
}

std::vector<std::string> shim_command(const ExecConfig& cfg) {
  std::vector<std::string> argv;
  if (cfg.shim_path.extension() == ".py") argv = cfg.python_command;
  // children run inside a scratch directory
  argv.push_back(std::filesystem::absolute(cfg.shim_path).string());
  return argv;
}

class PythonRunner {
 public:
  PythonRunner(const ExecConfig& cfg, const Task& task) : cfg_(cfg), task_(task) {}

  std::vector<Outcome> run(const CandidateProgram& candidate, const std::vector<InputValue>& inputs) {
    std::vector<Outcome> out(inputs.size());
    std::error_code ec;
    if (cfg_.shim_path.empty() || !std::filesystem::exists(cfg_.shim_path, ec)) {
      return replicate(ErrorType::sandbox_failure(), inputs.size());
    }
    detail::TempDir dir;
    const auto file = dir.path() / "candidate.py";
    write_text_file(file, candidate.source);

    std::vector<std::string> argv = shim_command(cfg_);
    argv.push_back(file.string());
    argv.push_back("--task-kind");
    argv.push_back(task_.is_stdin() ? "stdin" : "function");
    if (const auto* fn = task_.function()) {
      argv.push_back("--entry");
      argv.push_back(fn->entry_name);
    }
    const detail::SpawnOptions opts{dir.path(), cfg_.memory_cap_mb};

    std::optional<Subprocess> proc;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      if (!proc) {
        proc = Subprocess::spawn(argv, opts);
        if (!proc) {
          out[k] = Outcome::abnormal(ErrorType::sandbox_failure());
          continue;
        }
      }
      json request{{"id", k}};
      if (inputs[k].is_stdin()) {
        request["stdin"] = inputs[k].stdin_text();
      } else {
        request["args"] = inputs[k].args();
      }
      const std::string line_out = request.dump() + "\n";

      const auto start = Clock::now();
      const auto deadline = start + std::chrono::milliseconds(cfg_.timeout_ms_per_input);
      std::string line;
      auto io = proc->write_all(line_out, deadline);
      if (io == Subprocess::IoResult::Ok) io = proc->read_line(line, deadline);
      const auto ms = elapsed_ms(start);

      if (io == Subprocess::IoResult::Timeout) {
        out[k] = Outcome::abnormal(ErrorType::timeout(), ms);
        proc.reset();
        continue;
      }
      if (io == Subprocess::IoResult::Closed) {
        out[k] = Outcome::abnormal(from_exit(proc->wait_or_kill(std::chrono::milliseconds(100))), ms);
        proc.reset();
        continue;
      }

      bool restart = true;
      out[k] = decode_response(line, k, ms, restart);
      if (!out[k].is_normal() && out[k].error().kind == ErrorType::Kind::RuntimeError &&
          is_candidate_level(out[k].error().class_name)) {
        for (std::size_t r = k + 1; r < inputs.size(); ++r) out[r] = Outcome::abnormal(out[k].error());
        break;
      }
      if (restart) proc.reset();
    }
    if (proc) {
      proc->close_stdin();
      proc->wait_or_kill(std::chrono::milliseconds(200));
    }
    return out;
  }

 private:
  Outcome decode_response(const std::string& line, std::size_t id, std::int64_t ms, bool& restart) const {
    restart = true;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      return Outcome::abnormal(ErrorType::decode_error(), ms);
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer() ||
        j["id"].get<std::int64_t>() != static_cast<std::int64_t>(id)) {
      return Outcome::abnormal(ErrorType::sandbox_failure(), ms);
    }
    const std::string status = j.value("status", "");
    if (status == "ok") {
      const auto raw = raw_member(line, "output");
      if (!raw) return Outcome::abnormal(ErrorType::decode_error(), ms);
      try {
        restart = false;
        return Outcome::normal(canonical_from_wire(*raw, task_.is_stdin()), ms);
      } catch (const Error&) {
        restart = true;
        return Outcome::abnormal(ErrorType::decode_error(), ms);
      }
    }
    if (status == "error" && j.contains("error_type") && j["error_type"].is_string()) {
      return Outcome::abnormal(ErrorType::runtime(j["error_type"].get<std::string>()), ms);
    }
    return Outcome::abnormal(ErrorType::sandbox_failure(), ms);
  }

  const ExecConfig& cfg_;
  const Task& task_;
};

// Compiled languages: build once, then one process per input fed on stdin.
class CompiledRunner {
 public:
  CompiledRunner(const ExecConfig& cfg, const Task& task) : cfg_(cfg), task_(task) {}

  std::vector<Outcome> run(const CandidateProgram& candidate, const std::vector<InputValue>& inputs) {
    if (!task_.is_stdin()) return replicate(ErrorType::sandbox_failure(), inputs.size());
    detail::TempDir dir;
    std::vector<std::string> compile;
    std::vector<std::string> exec;
    if (task_.language.kind == Language::Kind::Cpp) {
      const auto src = dir.path() / "candidate.cpp";
      const auto bin = dir.path() / "candidate";
      write_text_file(src, candidate.source);
      compile = {cfg_.cxx_compiler, "-O2", "-std=c++17", "-o", bin.string(), src.string()};
      exec = {bin.string()};
    } else {
      static const std::regex kPublicClass(R"(public\s+(?:final\s+)?class\s+([A-Za-z_]\w*))");
      std::smatch m;
      const std::string cls = std::regex_search(candidate.source, m, kPublicClass) ? m[1].str() : "Main";
      const auto src = dir.path() / (cls + ".java");
      write_text_file(src, candidate.source);
      compile = {"javac", "-d", dir.path().string(), src.string()};
      exec = {"java", "-cp", dir.path().string(), cls};
    }

    const auto compiled = run_compiler(compile, dir.path());
    if (!compiled) return replicate(ErrorType::sandbox_failure(), inputs.size());
    if (!*compiled) return replicate(ErrorType::runtime("CompileError"), inputs.size());

    std::vector<Outcome> out;
    out.reserve(inputs.size());
    const detail::SpawnOptions opts{dir.path(), cfg_.memory_cap_mb};
    for (const auto& input : inputs) out.push_back(run_one(exec, opts, input.stdin_text()));
    return out;
  }

 private:
  // nullopt: compiler could not be started; false: compilation failed.
  std::optional<bool> run_compiler(const std::vector<std::string>& argv, const std::filesystem::path& dir) const {
    auto proc = Subprocess::spawn(argv, {dir, std::nullopt});
    if (!proc) return std::nullopt;
    std::string ignored;
    const auto deadline = Clock::now() + std::chrono::milliseconds(cfg_.compile_timeout_ms);
    if (proc->communicate("", ignored, deadline) != Subprocess::IoResult::Ok) {
      proc->kill();
      proc->wait();
      return false;
    }
    const auto st = proc->wait_or_kill(std::chrono::milliseconds(cfg_.compile_timeout_ms));
    return st.exited && st.code == 0;
  }

  Outcome run_one(const std::vector<std::string>& argv, const detail::SpawnOptions& opts,
                  const std::string& stdin_text) const {
    const auto start = Clock::now();
    const auto deadline = start + std::chrono::milliseconds(cfg_.timeout_ms_per_input);
    auto proc = Subprocess::spawn(argv, opts);
    if (!proc) return Outcome::abnormal(ErrorType::sandbox_failure(), elapsed_ms(start));
    std::string output;
    const auto io = proc->communicate(stdin_text, output, deadline);
    if (io == Subprocess::IoResult::Timeout) {
      proc->kill();
      proc->wait();
      return Outcome::abnormal(ErrorType::timeout(), elapsed_ms(start));
    }
    if (io == Subprocess::IoResult::Closed) {
      proc->kill();
      proc->wait();
      return Outcome::abnormal(ErrorType::decode_error(), elapsed_ms(start));
    }
    const auto left = std::max(std::chrono::milliseconds(0),
                               std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()));
    const auto st = proc->wait_or_kill(left);
    const auto ms = elapsed_ms(start);
    if (!st.exited && st.code == SIGKILL && Clock::now() >= deadline) {
      return Outcome::abnormal(ErrorType::timeout(), ms);
    }
    if (!st.exited || st.code != 0) return Outcome::abnormal(from_exit(st), ms);
    try {
      return Outcome::normal(normalize(output), ms);
    } catch (const Error&) {
      return Outcome::abnormal(ErrorType::decode_error(), ms);
    }
  }

  const ExecConfig& cfg_;
  const Task& task_;
};

}  // namespace

std::string ErrorType::label() const {
  switch (kind) {
    case Kind::Timeout: return "Timeout";
    case Kind::RuntimeError: return "RuntimeError:" + class_name;
    case Kind::NonzeroExit: return "NonzeroExit:" + std::to_string(code);
    case Kind::OutputDecodeError: return "OutputDecodeError";
    case Kind::SandboxFailure: return "SandboxFailure";
  }
  return "SandboxFailure";
}

ErrorType ErrorType::from_label(std::string_view label) {
  if (label == "Timeout") return timeout();
  if (label == "OutputDecodeError") return decode_error();
  if (label == "SandboxFailure") return sandbox_failure();
  if (label.rfind("RuntimeError:", 0) == 0) return runtime(std::string(label.substr(13)));
  if (label.rfind("NonzeroExit:", 0) == 0) {
    try {
      return nonzero_exit(std::stoi(std::string(label.substr(12))));
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorKind::SchemaMismatch, "unknown error label '" + std::string(label) + "'");
}

bool same_behaviour(const ExecutionSignature& a, const ExecutionSignature& b) { return a.outcomes == b.outcomes; }

json outcome_to_json(const Outcome& o) {
  json j = o.is_normal() ? json{{"ok", o.output()}} : json{{"error", o.error().label()}};
  j["ms"] = o.wall_time_ms;
  return j;
}

Outcome outcome_from_json(const json& j) {
  const std::int64_t ms = j.value("ms", std::int64_t{0});
  if (j.contains("ok")) return Outcome::normal(j.at("ok").get<std::string>(), ms);
  if (j.contains("error")) return Outcome::abnormal(ErrorType::from_label(j.at("error").get<std::string>()), ms);
  throw Error(ErrorKind::SchemaMismatch, "outcome needs 'ok' or 'error'");
}

json signatures_to_json(const std::vector<ExecutionSignature>& sigs) {
  json arr = json::array();
  for (const auto& s : sigs) {
    json outcomes = json::array();
    for (const auto& o : s.outcomes) outcomes.push_back(outcome_to_json(o));
    arr.push_back({{"task_id", s.task_id}, {"rank", s.rank}, {"outcomes", std::move(outcomes)}});
  }
  return arr;
}

std::vector<ExecutionSignature> signatures_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::SchemaMismatch, "signatures must be an array");
  std::vector<ExecutionSignature> out;
  for (const auto& s : j) {
    ExecutionSignature sig;
    sig.task_id = s.at("task_id").get<std::string>();
    sig.rank = s.at("rank").get<int>();
    for (const auto& o : s.at("outcomes")) sig.outcomes.push_back(outcome_from_json(o));
    out.push_back(std::move(sig));
  }
  return out;
}

void ExecConfig::validate() const {
  if (timeout_ms_per_input <= 0) throw Error(ErrorKind::InvalidArgument, "timeout_ms_per_input must be > 0");
  if (max_parallel_workers < 1) throw Error(ErrorKind::InvalidArgument, "max_parallel_workers must be >= 1");
  if (memory_cap_mb && *memory_cap_mb <= 0) throw Error(ErrorKind::InvalidArgument, "memory_cap_mb must be > 0");
}

SubprocessExecutor::SubprocessExecutor(ExecConfig config) : config_(std::move(config)) {
  config_.validate();
  detail::ignore_sigpipe();
}

std::vector<Outcome> SubprocessExecutor::run_candidate(const Task& task, const CandidateProgram& candidate,
                                                       const std::vector<InputValue>& inputs) const {
  try {
    switch (task.language.kind) {
      case Language::Kind::Python: return PythonRunner(config_, task).run(candidate, inputs);
      case Language::Kind::Cpp:
      case Language::Kind::Java: return CompiledRunner(config_, task).run(candidate, inputs);
      case Language::Kind::Other: break;
    }
  } catch (const std::exception&) {
    // harness fault (temp dir, file write); never a program fault
  }
  return replicate(ErrorType::sandbox_failure(), inputs.size());
}

std::vector<ExecutionSignature> SubprocessExecutor::execute_all(const Task& task,
                                                                const std::vector<CandidateProgram>& candidates,
                                                                const std::vector<InputValue>& inputs) {
  if (candidates.empty() || inputs.empty()) {
    throw Error(ErrorKind::InvalidArgument, "execute_all needs candidates and inputs");
  }
  std::vector<ExecutionSignature> results(candidates.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < candidates.size(); i = next++) {
      results[i] = {task.task_id, candidates[i].rank, run_candidate(task, candidates[i], inputs)};
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config_.max_parallel_workers), candidates.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  return results;
}

namespace {
std::string inputs_fingerprint(const json& inputs) { return inputs.dump(); }

json inputs_json(const std::vector<InputValue>& inputs) {
  json arr = json::array();
  for (const auto& in : inputs) arr.push_back(in.to_json());
  return arr;
}
}  // namespace

json recording_to_json(const std::string& task_id, const std::vector<InputValue>& inputs,
                       const std::vector<ExecutionSignature>& sigs) {
  return {{"task_id", task_id}, {"inputs", inputs_json(inputs)}, {"signatures", signatures_to_json(sigs)}};
}

ReplayExecutor::ReplayExecutor(const std::filesystem::path& dir) { load_dir(dir); }

void ReplayExecutor::load_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    try {
      load(json::parse(read_text_file(f)));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::SchemaMismatch, f.string() + ": " + e.what());
    }
  }
}

void ReplayExecutor::load(const json& recording) {
  if (recording.is_array()) {
    auto sigs = signatures_from_json(recording);
    if (!sigs.empty()) any_[sigs.front().task_id] = std::move(sigs);
    return;
  }
  if (!recording.is_object() || !recording.contains("signatures") || !recording.contains("inputs")) {
    throw Error(ErrorKind::SchemaMismatch, "recording needs task_id, inputs and signatures");
  }
  exact_[{recording.at("task_id").get<std::string>(), inputs_fingerprint(recording.at("inputs"))}] =
      signatures_from_json(recording.at("signatures"));
}

void ReplayExecutor::record(const std::string& task_id, const std::vector<InputValue>& inputs,
                            std::vector<ExecutionSignature> sigs) {
  exact_[{task_id, inputs_fingerprint(inputs_json(inputs))}] = std::move(sigs);
}

void ReplayExecutor::record(const std::string& task_id, std::vector<ExecutionSignature> sigs) {
  any_[task_id] = std::move(sigs);
}

std::vector<ExecutionSignature> ReplayExecutor::execute_all(const Task& task,
                                                            const std::vector<CandidateProgram>& candidates,
                                                            const std::vector<InputValue>& inputs) {
  const std::vector<ExecutionSignature>* recorded = nullptr;
  if (auto it = exact_.find({task.task_id, inputs_fingerprint(inputs_json(inputs))}); it != exact_.end()) {
    recorded = &it->second;
  } else if (auto jt = any_.find(task.task_id); jt != any_.end()) {
    recorded = &jt->second;
  }
  std::vector<ExecutionSignature> out;
  for (const auto& c : candidates) {
    ExecutionSignature sig{task.task_id, c.rank, replicate(ErrorType::sandbox_failure(), inputs.size())};
    if (recorded) {
      for (const auto& rec : *recorded) {
        if (rec.rank == c.rank && rec.outcomes.size() == inputs.size()) sig.outcomes = rec.outcomes;
      }
    }
    out.push_back(std::move(sig));
  }
  return out;
}

std::vector<ExecutionSignature> execute_all(const Task& task, const std::vector<CandidateProgram>& candidates,
                                            const std::vector<InputValue>& inputs, const ExecConfig& config) {
  return SubprocessExecutor(config).execute_all(task, candidates, inputs);
}

std::string canonical_from_wire(std::string_view raw_output_json, bool stdin_task) {
  if (stdin_task) {
    try {
      const json j = json::parse(raw_output_json);
      if (j.is_string()) return normalize(j.get<std::string>());
    } catch (const json::exception&) {
    }
  }
  return normalize(raw_output_json);
}

std::string canonical_expected(const json& expected, bool stdin_task) {
  if (stdin_task && expected.is_string()) return normalize(expected.get<std::string>());
  return normalize(expected.dump());
}

InputQuality diagnostics(const std::vector<ExecutionSignature>& signatures, const std::vector<InputValue>& inputs) {
  InputQuality q;
  const std::size_t n = inputs.size();
  if (n == 0) return q;
  std::size_t valid = 0;
  std::size_t crashes = 0;
  for (std::size_t j = 0; j < n; ++j) {
    bool any_normal = false;
    for (const auto& s : signatures) {
      if (j >= s.outcomes.size()) throw Error(ErrorKind::LengthMismatch, "signature shorter than input set");
      if (s.outcomes[j].is_normal()) {
        any_normal = true;
      } else {
        ++crashes;
      }
    }
    if (any_normal) ++valid;
  }
  std::unordered_set<std::string> unique;
  for (const auto& in : inputs) unique.insert(input_key(in));

  q.valid_exec_rate = static_cast<double>(valid) / static_cast<double>(n);
  q.unique_input_rate = static_cast<double>(unique.size()) / static_cast<double>(n);
  q.crash_pollution_rate =
      signatures.empty() ? 0.0 : static_cast<double>(crashes) / static_cast<double>(signatures.size() * n);
  return q;
}

}  // namespace sde
