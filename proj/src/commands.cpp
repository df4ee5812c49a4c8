#include "sde/commands.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "sde/error.hpp"
#include "sde/rng.hpp"

namespace sde {

using json = nlohmann::json;

DistanceWeights parse_weights(std::string_view text) {
  std::vector<double> parts;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "weights must be three numbers, got '" + std::string(text) + "'");
    }
  }
  if (parts.size() != 3) throw Error(ErrorKind::InvalidArgument, "weights must be a,b,c");
  DistanceWeights w{parts[0], parts[1], parts[2]};
  w.validate();
  return w;
}

namespace {

json number_or_marker(double v) {
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  if (std::isnan(v)) return "NaN";
  return v;
}

json weights_json(const DistanceWeights& w) { return json::array({w.a, w.b, w.c}); }

bool has_python_tasks(const Corpus& corpus) {
  for (const auto& t : corpus.tasks) {
    if (t.language.kind == Language::Kind::Python) return true;
  }
  return false;
}

}  // namespace

json run_manifest(const RunOptions& options, const RunResult& result) {
  json timings = result.timings.to_json();
  timings["wall_ms"] = result.wall_ms;
  return {{"corpus_path", options.corpus_dir.string()},
          {"k", options.pipeline.k},
          {"fuzz", fuzz_config_to_json(options.pipeline.fuzz)},
          {"exec", exec_config_to_json(options.exec)},
          {"weights", weights_json(options.pipeline.weights)},
          {"rng_seeds", {{"fuzz_seed", options.pipeline.fuzz.rng_seed}}},
          {"jobs", options.pipeline.jobs},
          {"replay_dir", options.replay_dir ? json(options.replay_dir->string()) : json(nullptr)},
          {"versions",
           {{"sde", kVersion},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
          {"timings_ms", timings},
          {"tasks", result.rows.size()},
          {"errored_tasks", result.errored_tasks()}};
}

int cmd_run(const RunOptions& options, std::ostream& log) {
  Corpus corpus;
  std::unique_ptr<Executor> executor;
  try {
    options.pipeline.validate();
    options.exec.validate();
    corpus = load_corpus(options.corpus_dir);
    if (options.replay_dir) {
      auto replay = std::make_unique<ReplayExecutor>();
      for (const char* sub : {"signatures", "reference"}) {
        if (std::filesystem::is_directory(*options.replay_dir / sub)) replay->load_dir(*options.replay_dir / sub);
      }
      executor = std::move(replay);
    } else {
      if (has_python_tasks(corpus) && !std::filesystem::exists(options.exec.shim_path)) {
        throw Error(ErrorKind::InvalidArgument, "python tasks need --shim pointing at an existing driver");
      }
      executor = std::make_unique<SubprocessExecutor>(options.exec);
    }
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitFatal;
  }

  PipelineConfig config = options.pipeline;
  config.cache_dir = options.out_dir / "cache";
  RunResult result;
  try {
    std::filesystem::create_directories(options.out_dir);
    result = run_pipeline(corpus, config, *executor);
    write_report(result.rows, options.out_dir / "report.jsonl");
    write_text_file(options.out_dir / "manifest.json", run_manifest(options, result).dump(2) + "\n");
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitFatal;
  }

  for (const auto& row : result.rows) {
    if (!row.ok) log << "task " << row.task_id << " failed: " << row.error << "\n";
  }
  log << result.rows.size() << " tasks, " << result.errored_tasks() << " errored\n";
  return result.errored_tasks() > 0 ? kExitPartial : kExitOk;
}

json calibrate_summary(const std::vector<TaskReport>& rows, UncertaintyMetric metric, double fpr_cap, int folds,
                       std::uint64_t split_seed) {
  const auto labelled = labelled_rows(rows);
  std::vector<double> scores;
  std::unique_ptr<bool[]> pass(new bool[labelled.size()]);
  for (std::size_t i = 0; i < labelled.size(); ++i) {
    scores.push_back(metric_value(labelled[i], metric));
    pass[i] = labelled[i].targets->pass1;
  }
  const AbstentionResult r =
      calibrate_abstention(scores, std::span<const bool>(pass.get(), labelled.size()), fpr_cap, folds, split_seed);
  json per_fold = json::array();
  for (const auto& f : r.folds) {
    per_fold.push_back(
        {{"tau", number_or_marker(f.tau)}, {"infeasible", f.infeasible}, {"accuracy", f.accuracy}, {"fpr", f.fpr}});
  }
  return {{"metric", to_string(metric)},
          {"fpr_cap", fpr_cap},
          {"folds", folds},
          {"split_seed", split_seed},
          {"n_tasks", labelled.size()},
          {"tau", number_or_marker(r.tau)},
          {"infeasible", r.infeasible},
          {"accuracy", {{"mean", r.accuracy.mean}, {"std", r.accuracy.std}}},
          {"fpr", {{"mean", r.fpr.mean}, {"std", r.fpr.std}}},
          {"per_fold", per_fold}};
}

json learn_weights_summary(const std::vector<TaskReport>& rows,
                           const std::map<std::string, ClusterPartition>& partitions, double split_ratio,
                           std::uint64_t split_seed, int grid_steps) {
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw Error(ErrorKind::InvalidArgument, "split ratio must be in (0, 1)");
  std::vector<WeightSample> samples;
  for (const auto& r : labelled_rows(rows)) {
    const auto it = partitions.find(r.task_id);
    if (it != partitions.end()) samples.push_back({it->second, r.targets->partial_pass1});
  }
  if (samples.size() < 2) throw Error(ErrorKind::DegenerateLabels, "need at least two labelled tasks with signatures");

  Rng rng(split_seed);
  for (std::size_t i = samples.size(); i > 1; --i) std::swap(samples[i - 1], samples[rng.below(i)]);
  auto n_train = static_cast<std::size_t>(std::lround(split_ratio * static_cast<double>(samples.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, samples.size() - 1);
  const std::vector<WeightSample> train(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<WeightSample> test(samples.begin() + static_cast<std::ptrdiff_t>(n_train), samples.end());

  const LearnedWeights learned = learn_weights(train, grid_steps);
  const Stat test_learned = dsde_auroc(test, learned.weights);
  const Stat test_default = dsde_auroc(test, DistanceWeights::defaults());
  Stat gap;
  if (test_learned && test_default) gap = *test_learned - *test_default;
  return {{"weights", weights_json(learned.weights)},
          {"default_weights", weights_json(DistanceWeights::defaults())},
          {"grid_step", 1.0 / grid_steps},
          {"split_ratio", split_ratio},
          {"split_seed", split_seed},
          {"n_train", train.size()},
          {"n_test", test.size()},
          {"train_auroc", learned.train_auroc},
          {"default_train_auroc", learned.default_train_auroc},
          {"test_auroc", stat_to_json(test_learned)},
          {"default_test_auroc", stat_to_json(test_default)},
          {"test_auroc_gap", stat_to_json(gap)}};
}

namespace {

json metric_block(const std::vector<TaskReport>& labelled) {
  std::vector<double> partial;
  std::unique_ptr<bool[]> pass(new bool[labelled.size()]);
  for (std::size_t i = 0; i < labelled.size(); ++i) {
    partial.push_back(labelled[i].targets->partial_pass1);
    pass[i] = labelled[i].targets->pass1;
  }
  const std::span<const bool> pass_span(pass.get(), labelled.size());
  json block = json::object();
  for (auto m : {UncertaintyMetric::SDE, UncertaintyMetric::DSDE, UncertaintyMetric::SCEntropy}) {
    std::vector<double> scores;
    for (const auto& r : labelled) scores.push_back(metric_value(r, m));
    block[to_string(m)] = metric_stats_to_json(evaluate_metric(scores, pass_span, partial));
  }
  return block;
}

}  // namespace

json eval_summary(const std::vector<TaskReport>& rows, const EvalOptions& options) {
  const auto labelled = labelled_rows(rows);
  json out;
  out["n_rows"] = rows.size();
  out["n_tasks"] = labelled.size();
  out["metrics"] = metric_block(labelled);

  std::map<std::string, std::vector<TaskReport>> by_difficulty;
  for (const auto& r : labelled) by_difficulty[to_string(r.difficulty)].push_back(r);
  out["per_difficulty"] = json::object();
  for (const auto& [name, group] : by_difficulty) {
    out["per_difficulty"][name] = {{"n_tasks", group.size()}, {"metrics", metric_block(group)}};
  }

  try {
    out["abstention"] =
        calibrate_summary(rows, options.abstention_metric, options.fpr_cap, options.folds, options.split_seed);
  } catch (const Error& e) {
    out["abstention"] = {{"error", e.what()}};
  }
  if (options.signatures_dir) {
    try {
      out["weights"] = learn_weights_summary(rows, load_partitions(*options.signatures_dir), options.split_ratio,
                                             options.split_seed);
    } catch (const Error& e) {
      out["weights"] = {{"error", e.what()}};
    }
  }
  return out;
}

int cmd_sample(const SampleOptions& options, std::ostream& log) {
  Corpus corpus;
  try {
    options.sampler.validate();
    read_jsonl(options.tasks_file, [&](const json& j, std::size_t) { corpus.tasks.push_back(task_from_json(j)); });
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitFatal;
  }

  int failed = 0;
  const auto archive = options.out_dir / "archive";
  std::filesystem::create_directories(archive);
  for (const auto& task : corpus.tasks) {
    try {
      SampleResult r = sample_candidates(task, options.sampler);
      json record{{"task_id", task.task_id}, {"responses", r.raw_responses}};
      write_text_file(archive / cache_file_name(task.task_id), record.dump() + "\n");
      for (auto& c : r.candidates) corpus.candidates.push_back(std::move(c));
      log << "sampled " << task.task_id << "\n";
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::MissingApiKey || e.kind() == ErrorKind::InvalidArgument) {
        log << "error: " << e.what() << "\n";
        return kExitFatal;
      }
      log << "task " << task.task_id << " failed: " << e.what() << "\n";
      ++failed;
    }
  }
  write_corpus(corpus, options.out_dir);
  return failed > 0 ? kExitPartial : kExitOk;
}

}  // namespace sde
