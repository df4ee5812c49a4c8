#include "sde/fuzzgen.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <climits>
#include <cmath>
#include <unordered_set>

#include "sde/error.hpp"
#include "sde/normalize.hpp"

namespace sde {

using nlohmann::json;

namespace {

constexpr std::string_view kAlnum = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
constexpr int kSeedFreeMaxStr = 16;
constexpr int kSeedFreeMaxDict = 8;

std::int64_t clamp_i(__int128 v, std::int64_t cap) {
  if (v > cap) return cap;
  if (v < -static_cast<__int128>(cap)) return -cap;
  return static_cast<std::int64_t>(v);
}

std::int64_t mutate_int(std::int64_t v, std::int64_t cap, Rng& rng) {
  const __int128 x = v;
  switch (rng.below(6)) {
    case 0: return clamp_i(x + 1, cap);
    case 1: return clamp_i(x - 1, cap);
    case 2: return clamp_i(x * 2, cap);
    case 3: return clamp_i(-x, cap);
    case 4: {
      // resample within one magnitude of the current value
      const std::int64_t c = clamp_i(x, cap);
      const std::int64_t m = std::max<std::int64_t>(c < 0 ? -c : c, 1);
      const std::int64_t lo = clamp_i(static_cast<__int128>(c) - m, cap);
      const std::int64_t hi = clamp_i(static_cast<__int128>(c) + m, cap);
      return rng.between(lo, hi);
    }
    default: {
      const std::int64_t boundary[] = {0, 1, -1, cap, -cap};
      return boundary[rng.below(5)];
    }
  }
}

double clamp_f(double v, double cap) {
  if (!std::isfinite(v)) return v > 0 ? cap : -cap;
  return std::clamp(v, -cap, cap);
}

double mutate_float(double v, std::int64_t cap, Rng& rng) {
  const double c = static_cast<double>(cap);
  switch (rng.below(7)) {
    case 0: return clamp_f(v + 1.0, c);
    case 1: return clamp_f(v - 1.0, c);
    case 2: return clamp_f(v * 2.0, c);
    case 3: return clamp_f(-v, c);
    case 4: {
      const double m = std::max(std::fabs(v), 1.0);
      return clamp_f(v + (2.0 * rng.unit() - 1.0) * m, c);
    }
    case 5: {
      const double boundary[] = {0.0, 1.0, -1.0, c, -c};
      return boundary[rng.below(5)];
    }
    default: {
      const double scale = std::max(std::fabs(v), 1.0) * 1e-3;
      return clamp_f(v + (2.0 * rng.unit() - 1.0) * scale, c);
    }
  }
}

char random_alnum(Rng& rng) { return kAlnum[rng.below(kAlnum.size())]; }

// `allow_empty` is false for stdin tokens, where an empty token would
// change the token count.
bool mutate_string(std::string& s, std::size_t max_len, bool allow_empty, Rng& rng) {
  switch (rng.below(5)) {
    case 0:
      if (s.size() >= max_len) return false;
      s.insert(s.begin() + static_cast<std::ptrdiff_t>(rng.below(s.size() + 1)), random_alnum(rng));
      return true;
    case 1:
      if (s.size() < (allow_empty ? 1u : 2u)) return false;
      s.erase(s.begin() + static_cast<std::ptrdiff_t>(rng.below(s.size())));
      return true;
    case 2:
      if (s.empty()) return false;
      s[rng.below(s.size())] = random_alnum(rng);
      return true;
    case 3:
      if (!allow_empty || s.empty()) return false;
      s.clear();
      return true;
    default: {
      bool changed = false;
      for (auto& ch : s) {
        const auto u = static_cast<unsigned char>(ch);
        if (std::islower(u)) {
          ch = static_cast<char>(std::toupper(u));
          changed = true;
        } else if (std::isupper(u)) {
          ch = static_cast<char>(std::tolower(u));
          changed = true;
        }
      }
      return changed;
    }
  }
}

std::int64_t as_int64(const json& v) {
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    return u > static_cast<std::uint64_t>(INT64_MAX) ? INT64_MAX : static_cast<std::int64_t>(u);
  }
  return v.get<std::int64_t>();
}

bool mutate_node(json& v, const FuzzConfig& cfg, Rng& rng) {
  const auto max_len = static_cast<std::size_t>(cfg.max_collection_len);
  switch (v.type()) {
    case json::value_t::number_integer:
    case json::value_t::number_unsigned:
      v = mutate_int(as_int64(v), cfg.numeric_magnitude_cap, rng);
      return true;
    case json::value_t::number_float:
      v = mutate_float(v.get<double>(), cfg.numeric_magnitude_cap, rng);
      return true;
    case json::value_t::boolean:
      v = !v.get<bool>();
      return true;
    case json::value_t::string: {
      auto s = v.get<std::string>();
      if (!mutate_string(s, max_len, true, rng)) return false;
      v = std::move(s);
      return true;
    }
    case json::value_t::array: {
      // element 4, append 2, pop 2, shuffle-prefix 1, empty 1
      const auto roll = rng.below(10);
      if (roll < 4) {
        if (v.empty()) return false;
        return mutate_node(v[rng.below(v.size())], cfg, rng);
      }
      if (roll < 6) {
        if (v.empty() || v.size() >= max_len) return false;
        json copy = v[rng.below(v.size())];
        mutate_node(copy, cfg, rng);
        v.push_back(std::move(copy));
        return true;
      }
      if (roll < 8) {
        if (v.empty()) return false;
        v.erase(v.begin() + static_cast<std::ptrdiff_t>(rng.below(v.size())));
        return true;
      }
      if (roll < 9) {
        if (v.size() < 2) return false;
        const auto k = static_cast<std::size_t>(rng.between(2, static_cast<std::int64_t>(v.size())));
        for (std::size_t i = k - 1; i > 0; --i) std::swap(v[i], v[rng.below(i + 1)]);
        return true;
      }
      if (v.empty()) return false;
      v = json::array();
      return true;
    }
    case json::value_t::object: {
      if (v.empty()) return false;
      auto it = v.begin();
      std::advance(it, static_cast<std::ptrdiff_t>(rng.below(v.size())));
      if (rng.below(2) == 0) return mutate_node(it.value(), cfg, rng);
      if (v.size() >= max_len) return false;
      // new key mirrors the existing key style
      const std::string& sample_key = it.key();
      const bool numeric_keys = !sample_key.empty() &&
                                std::all_of(sample_key.begin(), sample_key.end(), [](char c) {
                                  return std::isdigit(static_cast<unsigned char>(c)) || c == '-';
                                });
      std::string key;
      if (numeric_keys) {
        key = std::to_string(rng.between(-cfg.numeric_magnitude_cap, cfg.numeric_magnitude_cap));
      } else {
        const auto len = 1 + rng.below(8);
        for (std::size_t i = 0; i < len; ++i) key.push_back(random_alnum(rng));
      }
      if (v.contains(key)) return false;
      json copy = it.value();
      mutate_node(copy, cfg, rng);
      v[key] = std::move(copy);
      return true;
    }
    default: return false;
  }
}

// --- stdin tokens -------------------------------------------------------

enum class TokenKind { Int, Float, Word };

struct Segment {
  std::string text;
  bool separator = false;
};

bool is_ws(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<Segment> split_stdin(const std::string& text) {
  std::vector<Segment> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool sep = is_ws(text[i]);
    std::size_t j = i;
    while (j < text.size() && is_ws(text[j]) == sep) ++j;
    out.push_back({text.substr(i, j - i), sep});
    i = j;
  }
  return out;
}

TokenKind token_kind(std::string_view tok) {
  std::size_t i = (!tok.empty() && (tok[0] == '-' || tok[0] == '+')) ? 1 : 0;
  if (i < tok.size() && std::all_of(tok.begin() + static_cast<std::ptrdiff_t>(i), tok.end(),
                                    [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return TokenKind::Int;
  }
  double d = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
  if (ec == std::errc() && ptr == tok.data() + tok.size()) return TokenKind::Float;
  return TokenKind::Word;
}

std::string render_float(double d) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, ptr);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

bool mutate_token(std::string& tok, const FuzzConfig& cfg, Rng& rng) {
  switch (token_kind(tok)) {
    case TokenKind::Int: {
      std::int64_t v = 0;
      const char* begin = tok.data() + (tok[0] == '+' ? 1 : 0);
      auto [ptr, ec] = std::from_chars(begin, tok.data() + tok.size(), v);
      if (ec != std::errc()) v = tok[0] == '-' ? -cfg.numeric_magnitude_cap : cfg.numeric_magnitude_cap;
      tok = std::to_string(mutate_int(v, cfg.numeric_magnitude_cap, rng));
      return true;
    }
    case TokenKind::Float: {
      double d = 0;
      std::from_chars(tok.data(), tok.data() + tok.size(), d);
      tok = render_float(mutate_float(d, cfg.numeric_magnitude_cap, rng));
      return true;
    }
    case TokenKind::Word:
      return mutate_string(tok, std::max<std::size_t>(tok.size(), cfg.max_collection_len), false, rng);
  }
  return false;
}

// --- name rules ---------------------------------------------------------

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool contains(std::string_view hay, std::string_view needle) { return hay.find(needle) != std::string_view::npos; }

TypeHint singular_hint(const std::string& n) {
  static const std::unordered_set<std::string> kListNames = {"arr", "array", "list", "lst", "values",
                                                             "elements", "items", "data", "seq", "sequence"};
  static const std::unordered_set<std::string> kStrNames = {"s", "str", "string", "word", "text", "pattern"};
  static const std::unordered_set<std::string> kIntNames = {"n", "k", "m", "x", "y", "target", "num",
                                                            "count", "size", "length", "index", "idx"};
  if (n.rfind("is_", 0) == 0 || n.rfind("has_", 0) == 0 || contains(n, "flag")) return TypeHint::boolean();
  if (contains(n, "nums") || contains(n, "arr") || kListNames.count(n)) return TypeHint::list_of(TypeHint::integer());
  if (kStrNames.count(n) || contains(n, "str") || contains(n, "word")) return TypeHint::str();
  if (kIntNames.count(n) || contains(n, "num") || contains(n, "count")) return TypeHint::integer();
  return TypeHint::unknown();
}

bool is_plural(const std::string& n) {
  if (n.size() < 3 || n.back() != 's') return false;
  const std::string_view tail = std::string_view(n).substr(n.size() - 2);
  return tail != "ss" && tail != "us" && tail != "is";
}

std::vector<std::string> words_of(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Looks at the words around each mention of `name` in the description:
// "integer array nums", "string s", "k is an integer", ...
TypeHint hint_from_description(const std::string& name, const std::vector<std::string>& words) {
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i] != name) continue;
    std::vector<std::string> around;
    for (std::size_t k = (i >= 3 ? i - 3 : 0); k < i; ++k) around.push_back(words[k]);
    if (i + 1 < words.size() && words[i + 1] == "is") {
      for (std::size_t k = i + 2; k < std::min(words.size(), i + 5); ++k) around.push_back(words[k]);
    }
    auto has = [&](std::string_view w) { return std::find(around.begin(), around.end(), w) != around.end(); };
    if (has("array") || has("list")) {
      if (has("strings") || has("words")) return TypeHint::list_of(TypeHint::str());
      return TypeHint::list_of(TypeHint::integer());
    }
    if (has("string")) return TypeHint::str();
    if (has("boolean")) return TypeHint::boolean();
    if (has("integer") || has("number")) return TypeHint::integer();
  }
  return TypeHint::unknown();
}

}  // namespace

std::string to_string(FuzzMode mode) { return mode == FuzzMode::Seeded ? "seeded" : "seed-free"; }

FuzzMode parse_fuzz_mode(std::string_view text) {
  if (text == "seeded") return FuzzMode::Seeded;
  if (text == "seed-free" || text == "seedfree" || text == "seed_free") return FuzzMode::SeedFree;
  throw Error(ErrorKind::InvalidArgument, "unknown fuzz mode '" + std::string(text) + "'");
}

void FuzzConfig::validate() const {
  if (n_inputs < 1) throw Error(ErrorKind::InvalidArgument, "n_inputs must be >= 1");
  if (max_attempts_per_input < 1) throw Error(ErrorKind::InvalidArgument, "max_attempts_per_input must be >= 1");
  if (numeric_magnitude_cap < 1) throw Error(ErrorKind::InvalidArgument, "numeric_magnitude_cap must be >= 1");
  if (max_collection_len < 1) throw Error(ErrorKind::InvalidArgument, "max_collection_len must be >= 1");
}

SeedMutator::SeedMutator(const Task& task, const FuzzConfig& config)
    : task_(task), config_(config), rng_(Rng::for_task(task.task_id, config.rng_seed)) {
  config_.validate();
  if (task.seed_inputs.empty()) throw Error(ErrorKind::NoSeeds, task.task_id);
  for (const auto& seed : task.seed_inputs) {
    seed_shapes_.push_back(seed.is_stdin() ? TypeHint::unknown() : hint_of(seed.args()));
  }
}

InputValue SeedMutator::next() {
  for (int attempt = 0; attempt < config_.max_attempts_per_input; ++attempt) {
    const std::size_t which = rng_.below(task_.seed_inputs.size());
    const InputValue& seed = task_.seed_inputs[which];
    const int rounds = static_cast<int>(rng_.between(1, 3));

    if (seed.is_stdin()) {
      auto segments = split_stdin(seed.stdin_text());
      std::vector<std::size_t> tokens;
      for (std::size_t i = 0; i < segments.size(); ++i) {
        if (!segments[i].separator) tokens.push_back(i);
      }
      if (tokens.empty()) continue;
      bool changed = false;
      for (int r = 0; r < rounds; ++r) changed |= mutate_token(segments[rng_.pick(tokens)].text, config_, rng_);
      bool valid = changed;
      const auto original = split_stdin(seed.stdin_text());
      for (std::size_t i : tokens) {
        if (!valid) break;
        valid = !segments[i].text.empty() && token_kind(segments[i].text) == token_kind(original[i].text);
      }
      if (!valid) continue;
      std::string text;
      for (const auto& s : segments) text += s.text;
      return InputValue::stdin_text(std::move(text));
    }

    json args = seed.args();
    if (!args.is_array() || args.empty()) continue;
    bool changed = false;
    for (int r = 0; r < rounds; ++r) changed |= mutate_node(args[rng_.below(args.size())], config_, rng_);
    if (!changed || args.size() != seed.args().size()) continue;
    if (!conforms(args, seed_shapes_[which])) continue;
    return InputValue::args(std::move(args));
  }
  throw Error(ErrorKind::ExhaustedAttempts,
              "task '" + task_.task_id + "': no valid mutant after " +
                  std::to_string(config_.max_attempts_per_input) + " attempts");
}

std::vector<InputValue> mutate_seeded(const Task& task, const FuzzConfig& config) {
  SeedMutator mutator(task, config);
  std::vector<InputValue> out;
  out.reserve(static_cast<std::size_t>(config.n_inputs));
  for (int i = 0; i < config.n_inputs; ++i) out.push_back(mutator.next());
  return out;
}

TypeHint hint_from_name(std::string_view raw_name) {
  const std::string n = lower(raw_name);
  if (n.rfind("is_", 0) == 0 || n.rfind("has_", 0) == 0) return TypeHint::boolean();
  TypeHint direct = singular_hint(n);
  if (direct.kind != TypeHint::Kind::Unknown && (direct.kind == TypeHint::Kind::List || !is_plural(n))) return direct;
  if (is_plural(n)) {
    TypeHint elem = singular_hint(n.substr(0, n.size() - 1));
    if (elem.kind == TypeHint::Kind::List || elem.kind == TypeHint::Kind::Unknown) elem = TypeHint::integer();
    return TypeHint::list_of(elem);
  }
  return direct;
}

std::vector<TypeHint> infer_types(const Task& task) {
  std::vector<TypeHint> out;
  const FunctionInterface* fn = task.function();
  if (!fn) return out;
  const auto words = words_of(task.description);
  for (const auto& p : fn->parameters) {
    if (p.declared_type && p.declared_type->kind != TypeHint::Kind::Unknown) {
      out.push_back(*p.declared_type);
      continue;
    }
    TypeHint h = hint_from_name(p.name);
    if (h.kind == TypeHint::Kind::Unknown) h = hint_from_description(lower(p.name), words);
    out.push_back(std::move(h));
  }
  return out;
}

json sample_value(const TypeHint& hint, const FuzzConfig& cfg, Rng& rng, int depth) {
  using K = TypeHint::Kind;
  auto sample_int = [&]() -> std::int64_t {
    // log-uniform magnitude: uniform bit length, then uniform within it
    const std::int64_t cap = cfg.numeric_magnitude_cap;
    const int bits = 64 - __builtin_clzll(static_cast<unsigned long long>(cap));
    const int b = static_cast<int>(rng.between(0, bits));
    std::int64_t magnitude = 0;
    if (b > 0) {
      const std::int64_t lo = std::int64_t{1} << (b - 1);
      const std::int64_t hi = std::min<std::int64_t>(b >= 63 ? INT64_MAX : (std::int64_t{1} << b) - 1, cap);
      magnitude = lo > cap ? cap : rng.between(lo, hi);
    }
    return rng.chance(0.3) ? -magnitude : magnitude;
  };
  auto sample_str = [&](int max_len) {
    std::string s;
    const auto len = rng.between(0, max_len);
    for (std::int64_t i = 0; i < len; ++i) s.push_back(random_alnum(rng));
    return s;
  };

  if (depth >= kMaxTypeDepth) return sample_int();
  switch (hint.kind) {
    case K::Int: return sample_int();
    case K::Float: {
      const bool negative = rng.chance(0.3);
      double magnitude = static_cast<double>(std::llabs(sample_int()));
      magnitude += static_cast<double>(rng.below(1000)) / 1000.0;
      return negative ? -magnitude : magnitude;
    }
    case K::Bool: return rng.below(2) == 1;
    case K::Str: return sample_str(kSeedFreeMaxStr);
    case K::List: {
      json arr = json::array();
      const auto len = rng.between(0, cfg.max_collection_len);
      for (std::int64_t i = 0; i < len; ++i) arr.push_back(sample_value(hint.args.at(0), cfg, rng, depth + 1));
      return arr;
    }
    case K::Tuple: {
      json arr = json::array();
      for (const auto& slot : hint.args) arr.push_back(sample_value(slot, cfg, rng, depth + 1));
      return arr;
    }
    case K::Dict: {
      json obj = json::object();
      const auto len = rng.between(0, std::min(kSeedFreeMaxDict, cfg.max_collection_len));
      for (std::int64_t i = 0; i < len; ++i) {
        const json key = sample_value(hint.args.at(0), cfg, rng, depth + 1);
        std::string key_text = key.is_string() ? key.get<std::string>() : key.dump();
        obj[key_text] = sample_value(hint.args.at(1), cfg, rng, depth + 1);
      }
      return obj;
    }
    case K::Unknown: {
      static const TypeHint choices[] = {TypeHint::integer(), TypeHint::str(), TypeHint::list_of(TypeHint::integer())};
      return sample_value(choices[rng.below(3)], cfg, rng, depth + 1);
    }
  }
  return nullptr;
}

std::vector<InputValue> sample_seed_free(const std::vector<TypeHint>& hints, const FuzzConfig& config, Rng& rng) {
  config.validate();
  std::vector<InputValue> out;
  out.reserve(static_cast<std::size_t>(config.n_inputs));
  for (int i = 0; i < config.n_inputs; ++i) {
    json args = json::array();
    for (const auto& h : hints) args.push_back(sample_value(h, config, rng));
    out.push_back(InputValue::args(std::move(args)));
  }
  return out;
}

std::vector<InputValue> sample_seed_free(const std::vector<TypeHint>& hints, const FuzzConfig& config) {
  Rng rng(config.rng_seed);
  return sample_seed_free(hints, config, rng);
}

std::string input_key(const InputValue& input) {
  return input.is_stdin() ? normalize(input.stdin_text()) : normalize(input.args().dump());
}

DedupeResult dedupe_and_fill(const std::vector<InputValue>& candidates, int target, const FuzzConfig& config,
                             const std::function<InputValue()>& regenerate) {
  DedupeResult result;
  if (target <= 0) return result;
  std::unordered_set<std::string> seen;
  const auto want = static_cast<std::size_t>(target);
  for (const auto& c : candidates) {
    if (result.inputs.size() >= want) break;
    if (seen.insert(input_key(c)).second) result.inputs.push_back(c);
  }
  if (result.inputs.size() < want && regenerate) {
    long budget = static_cast<long>(config.max_attempts_per_input) * static_cast<long>(want - result.inputs.size());
    while (result.inputs.size() < want && budget-- > 0) {
      InputValue fresh = regenerate();
      if (seen.insert(input_key(fresh)).second) result.inputs.push_back(std::move(fresh));
    }
  }
  result.shortfall = result.inputs.size() < want;
  return result;
}

InputSet generate_inputs(const Task& task, const FuzzConfig& config) {
  config.validate();
  DedupeResult deduped;
  if (config.mode == FuzzMode::Seeded) {
    SeedMutator mutator(task, config);
    std::vector<InputValue> initial;
    for (int i = 0; i < config.n_inputs; ++i) initial.push_back(mutator.next());
    deduped = dedupe_and_fill(initial, config.n_inputs, config, [&] { return mutator.next(); });
  } else {
    if (task.is_stdin()) {
      throw Error(ErrorKind::InvalidArgument, "task '" + task.task_id + "': seed-free mode needs a function interface");
    }
    const auto hints = infer_types(task);
    Rng rng = Rng::for_task(task.task_id, config.rng_seed);
    auto initial = sample_seed_free(hints, config, rng);
    FuzzConfig single = config;
    single.n_inputs = 1;
    deduped = dedupe_and_fill(initial, config.n_inputs, config,
                              [&] { return sample_seed_free(hints, single, rng).front(); });
  }
  return {std::move(deduped.inputs), deduped.shortfall};
}

json input_set_to_json(const Task& task, const InputSet& set) {
  json inputs = json::array();
  for (const auto& v : set.inputs) inputs.push_back(v.to_json());
  return json{{"task_id", task.task_id},
              {"kind", task.is_stdin() ? "stdin" : "function"},
              {"uniqueness_shortfall", set.uniqueness_shortfall},
              {"inputs", std::move(inputs)}};
}

InputSet input_set_from_json(const Task& task, const json& j) {
  InputSet set;
  if (!j.is_object() || !j.contains("inputs")) throw Error(ErrorKind::SchemaMismatch, "input set lacks 'inputs'");
  for (const auto& v : j.at("inputs")) set.inputs.push_back(InputValue::from_json(v, task.is_stdin()));
  set.uniqueness_shortfall = j.value("uniqueness_shortfall", false);
  return set;
}

}  // namespace sde
