#include "sde/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <thread>

#include "sde/clustering.hpp"
#include "sde/error.hpp"
#include "sde/eval.hpp"
#include "sde/rng.hpp"

namespace sde {

using json = nlohmann::json;

void PipelineConfig::validate() const {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  if (jobs < 1) throw Error(ErrorKind::InvalidArgument, "jobs must be >= 1");
  fuzz.validate();
  weights.validate();
}

StageTimings& StageTimings::operator+=(const StageTimings& o) {
  sampling_ms += o.sampling_ms;
  fuzzing_ms += o.fuzzing_ms;
  execution_ms += o.execution_ms;
  metric_ms += o.metric_ms;
  return *this;
}

json StageTimings::to_json() const {
  return {{"sampling_ms", sampling_ms}, {"fuzzing_ms", fuzzing_ms}, {"execution_ms", execution_ms},
          {"metric_ms", metric_ms}};
}

int RunResult::errored_tasks() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const TaskReport& r) { return !r.ok; }));
}

std::string cache_file_name(std::string_view task_id) {
  std::string out;
  bool changed = false;
  for (char ch : task_id) {
    const bool safe = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
    out += safe ? ch : '_';
    changed |= !safe;
  }
  if (out.empty() || out.front() == '.') changed = true;
  if (changed) {
    // keep sanitised names of distinct ids distinct
    char buf[20];
    std::snprintf(buf, sizeof buf, "-%016llx", static_cast<unsigned long long>(fnv1a64(task_id)));
    out += buf;
  }
  return out + ".json";
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Cells that say nothing about the program's behaviour: it never ran.
bool is_setup_failure(const Outcome& o) {
  if (o.is_normal()) return false;
  const ErrorType& e = o.error();
  if (e.kind == ErrorType::Kind::SandboxFailure) return true;
  return e.kind == ErrorType::Kind::RuntimeError &&
         (e.class_name == "LoadError" || e.class_name == "EntryPointNotFound" || e.class_name == "CompileError");
}

void write_cache(const std::filesystem::path& dir, std::string_view task_id, const json& j) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / cache_file_name(task_id), j.dump() + "\n");
}

}  // namespace

TaskReport run_task(const Task& task, const std::vector<CandidateProgram>& all_candidates,
                    const PipelineConfig& config, Executor& executor, StageTimings* timings) {
  StageTimings local;
  TaskReport row;
  row.task_id = task.task_id;
  row.difficulty = task.difficulty;

  std::vector<CandidateProgram> candidates;
  for (const auto& c : all_candidates) {
    if (c.rank <= config.k) candidates.push_back(c);
  }
  row.k = static_cast<int>(candidates.size());
  auto fail = [&](std::string message) {
    row.ok = false;
    row.error = std::move(message);
    if (timings) *timings += local;
    return row;
  };
  if (candidates.empty()) return fail("no candidates");

  auto t0 = Clock::now();
  InputSet inputs;
  try {
    inputs = generate_inputs(task, config.fuzz);
  } catch (const Error& e) {
    local.fuzzing_ms += ms_since(t0);
    return fail(e.what());
  }
  local.fuzzing_ms += ms_since(t0);
  row.n = static_cast<int>(inputs.inputs.size());
  row.uniqueness_shortfall = inputs.uniqueness_shortfall;

  t0 = Clock::now();
  std::vector<ExecutionSignature> sigs;
  std::vector<ExecutionSignature> ref_sigs;
  std::vector<InputValue> ref_inputs;
  for (const auto& t : task.reference_tests) ref_inputs.push_back(t.input);
  try {
    sigs = executor.execute_all(task, candidates, inputs.inputs);
    if (!ref_inputs.empty()) ref_sigs = executor.execute_all(task, {candidates.front()}, ref_inputs);
  } catch (const Error& e) {
    local.execution_ms += ms_since(t0);
    return fail(e.what());
  }
  local.execution_ms += ms_since(t0);

  if (!config.cache_dir.empty()) {
    write_cache(config.cache_dir / "inputs", task.task_id, input_set_to_json(task, inputs));
    write_cache(config.cache_dir / "signatures", task.task_id, recording_to_json(task.task_id, inputs.inputs, sigs));
    if (!ref_inputs.empty()) {
      write_cache(config.cache_dir / "reference", task.task_id, recording_to_json(task.task_id, ref_inputs, ref_sigs));
    }
  }

  t0 = Clock::now();
  try {
    const ClusterPartition part = partition(sigs);
    row.scores = score(part, config.weights);
    row.dominant_index = part.dominant_index;
    for (const auto& c : part.clusters) row.clusters.push_back(c.members);
    row.quality = diagnostics(sigs, inputs.inputs);

    if (ref_inputs.empty()) {
      row.error = "no reference tests";
    } else {
      std::vector<std::pair<Outcome, json>> results;
      for (std::size_t i = 0; i < ref_inputs.size(); ++i) {
        results.emplace_back(ref_sigs.front().outcomes.at(i), task.reference_tests[i].expected);
      }
      row.targets = correctness(task, results);
    }
  } catch (const Error& e) {
    local.metric_ms += ms_since(t0);
    return fail(e.what());
  }
  local.metric_ms += ms_since(t0);

  const bool never_ran = std::all_of(sigs.begin(), sigs.end(), [](const ExecutionSignature& s) {
    return std::all_of(s.outcomes.begin(), s.outcomes.end(), is_setup_failure);
  });
  if (never_ran && row.n > 0) {
    row.ok = false;
    row.error = "no candidate could be loaded or run";
  }
  if (timings) *timings += local;
  return row;
}

RunResult run_pipeline(const Corpus& corpus, const PipelineConfig& config, Executor& executor) {
  config.validate();
  const auto t0 = Clock::now();
  RunResult result;
  result.rows.resize(corpus.tasks.size());
  std::vector<StageTimings> per_task(corpus.tasks.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < corpus.tasks.size(); i = next++) {
      const Task& task = corpus.tasks[i];
      result.rows[i] = run_task(task, corpus.candidates_for(task.task_id), config, executor, &per_task[i]);
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), corpus.tasks.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& t : per_task) result.timings += t;
  result.wall_ms = ms_since(t0);
  return result;
}

std::map<std::string, ClusterPartition> load_partitions(const std::filesystem::path& signatures_dir) {
  std::map<std::string, ClusterPartition> out;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(signatures_dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    json j;
    try {
      j = json::parse(read_text_file(f));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::SchemaMismatch, f.string() + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("signatures")) throw Error(ErrorKind::SchemaMismatch, f.string() + ": no signatures");
    const auto sigs = signatures_from_json(j.at("signatures"));
    if (sigs.empty()) continue;
    out.emplace(j.at("task_id").get<std::string>(), partition(sigs));
  }
  return out;
}

json fuzz_config_to_json(const FuzzConfig& c) {
  return {{"n_inputs", c.n_inputs},
          {"mode", to_string(c.mode)},
          {"rng_seed", c.rng_seed},
          {"max_attempts_per_input", c.max_attempts_per_input},
          {"numeric_magnitude_cap", c.numeric_magnitude_cap},
          {"max_collection_len", c.max_collection_len}};
}

json exec_config_to_json(const ExecConfig& c) {
  return {{"timeout_ms_per_input", c.timeout_ms_per_input},
          {"max_parallel_workers", c.max_parallel_workers},
          {"memory_cap_mb", c.memory_cap_mb ? json(*c.memory_cap_mb) : json(nullptr)},
          {"shim_path", c.shim_path.string()},
          {"python_command", c.python_command},
          {"cxx_compiler", c.cxx_compiler},
          {"compile_timeout_ms", c.compile_timeout_ms}};
}

}  // namespace sde
