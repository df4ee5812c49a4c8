#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sde/type_hint.hpp"

namespace sde {

enum class Difficulty { Easy, Medium, Hard, Unknown };

std::string to_string(Difficulty d);
Difficulty parse_difficulty(std::string_view text);

struct Language {
  enum class Kind { Python, Java, Cpp, Other };
  Kind kind = Kind::Python;
  std::string other_name;  // only for Kind::Other

  static Language parse(std::string_view text);
  std::string name() const;
  bool operator==(const Language&) const = default;
};

struct Parameter {
  std::string name;
  std::optional<TypeHint> declared_type;
  bool operator==(const Parameter&) const = default;
};

struct FunctionInterface {
  std::string entry_name;
  std::vector<Parameter> parameters;  // declaration order
  std::optional<TypeHint> returns;
  bool operator==(const FunctionInterface&) const = default;
};

/// Marker for programs that read stdin and write stdout.
struct StdinProgram {
  bool operator==(const StdinProgram&) const = default;
};

using Interface = std::variant<FunctionInterface, StdinProgram>;

/// One element of a task's input set. Function tasks carry the positional
/// argument list as a JSON array; stdin tasks carry raw text. Exactly one
/// is populated.
class InputValue {
 public:
  static InputValue args(nlohmann::json positional);
  static InputValue stdin_text(std::string text);

  bool is_stdin() const { return stdin_.has_value(); }
  const nlohmann::json& args() const { return args_; }
  const std::string& stdin_text() const { return *stdin_; }

  /// Wire/file form: the argument array itself, or the stdin string.
  nlohmann::json to_json() const;
  static InputValue from_json(const nlohmann::json& j, bool stdin_task);

  bool operator==(const InputValue&) const = default;

 private:
  nlohmann::json args_;
  std::optional<std::string> stdin_;
};

struct ReferenceTest {
  InputValue input;
  nlohmann::json expected;  // a string for stdin tasks
  bool operator==(const ReferenceTest&) const = default;
};

struct Task {
  std::string task_id;
  std::string description;
  Interface interface = StdinProgram{};
  std::vector<InputValue> seed_inputs;
  std::vector<ReferenceTest> reference_tests;
  Difficulty difficulty = Difficulty::Unknown;
  Language language;

  bool is_stdin() const { return std::holds_alternative<StdinProgram>(interface); }
  const FunctionInterface* function() const { return std::get_if<FunctionInterface>(&interface); }
  bool operator==(const Task&) const = default;
};

struct CandidateProgram {
  std::string task_id;
  int rank = 1;  // 1 = first sampled
  std::string source;
  bool operator==(const CandidateProgram&) const = default;
};

struct Corpus {
  std::vector<Task> tasks;
  std::vector<CandidateProgram> candidates;  // grouped by task order, then rank

  const Task* find_task(std::string_view task_id) const;
  std::vector<CandidateProgram> candidates_for(std::string_view task_id) const;
  bool operator==(const Corpus&) const = default;
};

nlohmann::json task_to_json(const Task& task);
/// Throws Error(ParseError) on missing or ill-typed fields.
Task task_from_json(const nlohmann::json& j);

/// Reads `tasks.jsonl` and `candidates.jsonl` from `dir` and validates
/// task ids and per-task rank contiguity.
Corpus load_corpus(const std::filesystem::path& dir);

/// Writes the two corpus files; load_corpus(dir) reproduces `corpus`.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

/// Reads a JSON-lines file, invoking `on_line(json, line_number)` for each
/// non-blank line. Parse failures raise ParseError naming path and line.
template <typename F>
void read_jsonl(const std::filesystem::path& path, F&& on_line);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace sde

#include "sde/detail/jsonl.hpp"
