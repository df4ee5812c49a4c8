#include "sde/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "sde/error.hpp"

namespace sde {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

[[noreturn]] void bad_field(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

const json& require(const json& j, const char* key) {
  if (!j.is_object()) bad_field("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) bad_field(std::string("missing key '") + key + "'");
  return *it;
}

std::string require_string(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) bad_field(std::string("key '") + key + "' must be a string");
  return v.get<std::string>();
}

json interface_to_json(const Interface& iface) {
  if (std::holds_alternative<StdinProgram>(iface)) return json{{"kind", "stdin"}};
  const auto& fn = std::get<FunctionInterface>(iface);
  json params = json::array();
  for (const auto& p : fn.parameters) {
    json jp{{"name", p.name}};
    jp["type"] = p.declared_type ? json(to_string(*p.declared_type)) : json(nullptr);
    params.push_back(std::move(jp));
  }
  json out{{"kind", "function"}, {"entry_name", fn.entry_name}, {"parameters", std::move(params)}};
  out["returns"] = fn.returns ? json(to_string(*fn.returns)) : json(nullptr);
  return out;
}

std::optional<TypeHint> optional_hint(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) bad_field(std::string("type annotation '") + key + "' must be a string");
  return parse_annotation(it->get<std::string>());
}

Interface interface_from_json(const json& j) {
  if (j.is_string()) {
    if (lower(j.get<std::string>()) == "stdin") return StdinProgram{};
    bad_field("interface string must be \"stdin\"");
  }
  const std::string kind = lower(require_string(j, "kind"));
  if (kind == "stdin") return StdinProgram{};
  if (kind != "function") bad_field("unknown interface kind '" + kind + "'");
  FunctionInterface fn;
  fn.entry_name = require_string(j, "entry_name");
  if (auto it = j.find("parameters"); it != j.end()) {
    if (!it->is_array()) bad_field("parameters must be an array");
    for (const auto& p : *it) {
      Parameter param;
      if (p.is_string()) {
        param.name = p.get<std::string>();
      } else {
        param.name = require_string(p, "name");
        param.declared_type = optional_hint(p, "type");
      }
      fn.parameters.push_back(std::move(param));
    }
  }
  fn.returns = optional_hint(j, "returns");
  return fn;
}

}  // namespace

std::string to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Medium: return "medium";
    case Difficulty::Hard: return "hard";
    case Difficulty::Unknown: return "unknown";
  }
  return "unknown";
}

Difficulty parse_difficulty(std::string_view text) {
  const std::string s = lower(text);
  if (s == "easy") return Difficulty::Easy;
  if (s == "medium") return Difficulty::Medium;
  if (s == "hard") return Difficulty::Hard;
  return Difficulty::Unknown;
}

Language Language::parse(std::string_view text) {
  const std::string s = lower(text);
  if (s == "python" || s == "py" || s == "python3") return {Kind::Python, {}};
  if (s == "java") return {Kind::Java, {}};
  if (s == "cpp" || s == "c++" || s == "cxx") return {Kind::Cpp, {}};
  return {Kind::Other, std::string(text)};
}

std::string Language::name() const {
  switch (kind) {
    case Kind::Python: return "python";
    case Kind::Java: return "java";
    case Kind::Cpp: return "cpp";
    case Kind::Other: return other_name;
  }
  return other_name;
}

InputValue InputValue::args(json positional) {
  InputValue v;
  v.args_ = std::move(positional);
  return v;
}

InputValue InputValue::stdin_text(std::string text) {
  InputValue v;
  v.stdin_ = std::move(text);
  return v;
}

json InputValue::to_json() const { return stdin_ ? json(*stdin_) : args_; }

InputValue InputValue::from_json(const json& j, bool stdin_task) {
  if (stdin_task) {
    if (!j.is_string()) bad_field("stdin input must be a string");
    return stdin_text(j.get<std::string>());
  }
  if (!j.is_array()) bad_field("function input must be an array of positional arguments");
  return args(j);
}

const Task* Corpus::find_task(std::string_view task_id) const {
  for (const auto& t : tasks) {
    if (t.task_id == task_id) return &t;
  }
  return nullptr;
}

std::vector<CandidateProgram> Corpus::candidates_for(std::string_view task_id) const {
  std::vector<CandidateProgram> out;
  for (const auto& c : candidates) {
    if (c.task_id == task_id) out.push_back(c);
  }
  return out;
}

json task_to_json(const Task& task) {
  json seeds = json::array();
  for (const auto& s : task.seed_inputs) seeds.push_back(s.to_json());
  json refs = json::array();
  for (const auto& r : task.reference_tests) refs.push_back({{"input", r.input.to_json()}, {"expected", r.expected}});
  return json{{"task_id", task.task_id},
              {"description", task.description},
              {"interface", interface_to_json(task.interface)},
              {"seed_inputs", std::move(seeds)},
              {"reference_tests", std::move(refs)},
              {"difficulty", to_string(task.difficulty)},
              {"language", task.language.name()}};
}

Task task_from_json(const json& j) {
  Task t;
  t.task_id = require_string(j, "task_id");
  if (t.task_id.empty()) bad_field("task_id must be non-empty");
  if (auto it = j.find("description"); it != j.end() && !it->is_null()) t.description = it->get<std::string>();
  t.interface = interface_from_json(require(j, "interface"));
  const bool stdin_task = t.is_stdin();
  if (auto it = j.find("seed_inputs"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) bad_field("seed_inputs must be an array");
    for (const auto& s : *it) t.seed_inputs.push_back(InputValue::from_json(s, stdin_task));
  }
  if (auto it = j.find("reference_tests"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) bad_field("reference_tests must be an array");
    for (const auto& r : *it) {
      if (r.is_array() && r.size() == 2) {
        t.reference_tests.push_back({InputValue::from_json(r[0], stdin_task), r[1]});
      } else {
        t.reference_tests.push_back({InputValue::from_json(require(r, "input"), stdin_task), require(r, "expected")});
      }
    }
  }
  if (auto it = j.find("difficulty"); it != j.end() && it->is_string()) {
    t.difficulty = parse_difficulty(it->get<std::string>());
  }
  if (auto it = j.find("language"); it != j.end() && it->is_string()) {
    t.language = Language::parse(it->get<std::string>());
  }
  return t;
}

Corpus load_corpus(const std::filesystem::path& dir) {
  Corpus corpus;
  std::unordered_map<std::string, std::size_t> task_index;

  read_jsonl(dir / "tasks.jsonl", [&](const json& j, std::size_t) {
    Task t = task_from_json(j);
    if (task_index.count(t.task_id)) throw Error(ErrorKind::DuplicateTask, t.task_id);
    task_index.emplace(t.task_id, corpus.tasks.size());
    corpus.tasks.push_back(std::move(t));
  });

  std::vector<std::pair<std::size_t, CandidateProgram>> staged;
  read_jsonl(dir / "candidates.jsonl", [&](const json& j, std::size_t) {
    CandidateProgram c;
    c.task_id = require_string(j, "task_id");
    const json& rank = require(j, "rank");
    if (!rank.is_number_integer()) bad_field("rank must be an integer");
    c.rank = rank.get<int>();
    c.source = require_string(j, "source");
    auto it = task_index.find(c.task_id);
    if (it == task_index.end()) throw Error(ErrorKind::MissingTask, c.task_id);
    staged.emplace_back(it->second, std::move(c));
  });

  std::stable_sort(staged.begin(), staged.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second.rank < b.second.rank;
  });

  std::size_t i = 0;
  while (i < staged.size()) {
    const std::size_t task = staged[i].first;
    int expected = 1;
    for (; i < staged.size() && staged[i].first == task; ++i, ++expected) {
      if (staged[i].second.rank != expected) {
        throw Error(ErrorKind::RankGap, "task '" + corpus.tasks[task].task_id + "': expected rank " +
                                            std::to_string(expected) + ", found " +
                                            std::to_string(staged[i].second.rank));
      }
      corpus.candidates.push_back(std::move(staged[i].second));
    }
  }
  return corpus;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << contents;
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::string tasks;
  for (const auto& t : corpus.tasks) tasks += task_to_json(t).dump() + "\n";
  std::string cands;
  for (const auto& c : corpus.candidates) {
    cands += json{{"task_id", c.task_id}, {"rank", c.rank}, {"source", c.source}}.dump() + "\n";
  }
  write_text_file(dir / "tasks.jsonl", tasks);
  write_text_file(dir / "candidates.jsonl", cands);
}

}  // namespace sde
