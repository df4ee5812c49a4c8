#include "sde/type_hint.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace sde {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

class AnnotationParser {
 public:
  explicit AnnotationParser(std::string_view text) : text_(text) {}

  TypeHint parse() {
    TypeHint h = parse_union(0);
    skip_ws();
    return pos_ == text_.size() ? h : TypeHint::unknown();
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
        ++pos_;
      } else {
        break;
      }
    }
    std::string_view name = text_.substr(start, pos_ - start);
    // typing.List -> List
    if (auto dot = name.rfind('.'); dot != std::string_view::npos) name = name.substr(dot + 1);
    return std::string(name);
  }

  // "X | None" and "Union[X, None]" both collapse to X.
  TypeHint parse_union(int depth) {
    std::vector<TypeHint> alternatives;
    do {
      TypeHint h = parse_postfix(depth);
      if (!is_none_) alternatives.push_back(std::move(h));
    } while (eat('|'));
    if (alternatives.empty()) return TypeHint::unknown();
    TypeHint out = alternatives.front();
    for (std::size_t i = 1; i < alternatives.size(); ++i) out = join(out, alternatives[i]);
    return out;
  }

  TypeHint parse_postfix(int depth) {
    TypeHint h = parse_primary(depth);
    // Java arrays: int[] / int[][]
    while (true) {
      skip_ws();
      if (text_.substr(pos_, 2) == "[]") {
        pos_ += 2;
        h = depth + 1 > kMaxTypeDepth ? TypeHint::unknown() : TypeHint::list_of(std::move(h));
      } else {
        break;
      }
    }
    return h;
  }

  std::vector<TypeHint> parse_args(int depth) {
    std::vector<TypeHint> args;
    if (!eat('[') && !eat('<')) return args;
    if (eat(']') || eat('>')) return args;
    do {
      args.push_back(parse_union(depth + 1));
    } while (eat(','));
    if (!eat(']')) eat('>');
    return args;
  }

  TypeHint parse_primary(int depth) {
    is_none_ = false;
    if (depth >= kMaxTypeDepth) {
      skip_balanced();
      return TypeHint::unknown();
    }
    const std::string raw = identifier();
    const std::string name = lower(raw);
    skip_ws();
    std::vector<TypeHint> args;
    if (pos_ < text_.size() && (text_[pos_] == '[' || text_[pos_] == '<') &&
        text_.substr(pos_, 2) != "[]") {
      args = parse_args(depth);
      is_none_ = false;
    }
    auto arg = [&](std::size_t i) { return i < args.size() ? args[i] : TypeHint::unknown(); };

    if (name == "int" || name == "integer" || name == "long" || name == "short") return TypeHint::integer();
    if (name == "float" || name == "double") return TypeHint::real();
    if (name == "bool" || name == "boolean") return TypeHint::boolean();
    if (name == "str" || name == "string" || name == "char" || name == "character") return TypeHint::str();
    if (name == "none" || name == "nonetype") {
      is_none_ = true;
      return TypeHint::unknown();
    }
    if (name == "list" || name == "sequence" || name == "iterable" || name == "set" ||
        name == "frozenset" || name == "deque" || name == "arraylist" || name == "vector") {
      return TypeHint::list_of(arg(0));
    }
    if (name == "tuple") {
      // Tuple[int, ...] is homogeneous.
      if (args.size() == 2 && text_.find("...") != std::string_view::npos) return TypeHint::list_of(args[0]);
      return TypeHint::tuple_of(std::move(args));
    }
    if (name == "dict" || name == "mapping" || name == "map" || name == "hashmap" || name == "defaultdict") {
      return TypeHint::dict_of(arg(0), arg(1));
    }
    if (name == "optional") return arg(0);
    if (name == "union") {
      TypeHint h = TypeHint::unknown();
      bool first = true;
      for (const auto& a : args) {
        if (a.kind == TypeHint::Kind::Unknown) continue;
        h = first ? a : join(h, a);
        first = false;
      }
      return h;
    }
    return TypeHint::unknown();
  }

  void skip_balanced() {
    int level = 0;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '[' || c == '<') {
        ++level;
      } else if (c == ']' || c == '>') {
        if (level == 0) return;
        --level;
      } else if ((c == ',' || c == '|') && level == 0) {
        return;
      }
      ++pos_;
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  bool is_none_ = false;
};

bool is_integer_key(const std::string& key) {
  if (key.empty()) return false;
  long long v = 0;
  const char* begin = key.data();
  const char* end = key.data() + key.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  return ec == std::errc() && ptr == end;
}

}  // namespace

TypeHint parse_annotation(std::string_view text) { return AnnotationParser(text).parse(); }

std::string to_string(const TypeHint& hint) {
  using K = TypeHint::Kind;
  switch (hint.kind) {
    case K::Int: return "int";
    case K::Float: return "float";
    case K::Bool: return "bool";
    case K::Str: return "str";
    case K::Unknown: return "Any";
    case K::List: return "List[" + to_string(hint.args.at(0)) + "]";
    case K::Dict: return "Dict[" + to_string(hint.args.at(0)) + ", " + to_string(hint.args.at(1)) + "]";
    case K::Tuple: {
      std::string out = "Tuple[";
      for (std::size_t i = 0; i < hint.args.size(); ++i) {
        if (i) out += ", ";
        out += to_string(hint.args[i]);
      }
      return out + "]";
    }
  }
  return "Any";
}

TypeHint join(const TypeHint& a, const TypeHint& b) {
  using K = TypeHint::Kind;
  if (a == b) return a;
  if (a.kind == K::Unknown && a.args.empty()) return b;
  if (b.kind == K::Unknown && b.args.empty()) return a;
  if ((a.kind == K::Int && b.kind == K::Float) || (a.kind == K::Float && b.kind == K::Int)) {
    return TypeHint::real();
  }
  if (a.kind != b.kind || a.args.size() != b.args.size()) return TypeHint::unknown();
  TypeHint out{a.kind, {}};
  for (std::size_t i = 0; i < a.args.size(); ++i) out.args.push_back(join(a.args[i], b.args[i]));
  return out;
}

TypeHint hint_of(const nlohmann::json& value) {
  using nlohmann::json;
  switch (value.type()) {
    case json::value_t::number_integer:
    case json::value_t::number_unsigned: return TypeHint::integer();
    case json::value_t::number_float: return TypeHint::real();
    case json::value_t::boolean: return TypeHint::boolean();
    case json::value_t::string: return TypeHint::str();
    case json::value_t::array: {
      TypeHint elem = TypeHint::unknown();
      bool first = true;
      for (const auto& v : value) {
        TypeHint h = hint_of(v);
        if (first) {
          elem = h;
          first = false;
        } else if (elem != h) {
          elem = join(elem, h);
          if (elem.kind == TypeHint::Kind::Unknown) break;
        }
      }
      return TypeHint::list_of(elem);
    }
    case json::value_t::object: {
      TypeHint val = TypeHint::unknown();
      bool first = true;
      for (const auto& [k, v] : value.items()) {
        TypeHint h = hint_of(v);
        val = first ? h : join(val, h);
        first = false;
      }
      return TypeHint::dict_of(TypeHint::str(), val);
    }
    default: return TypeHint::unknown();
  }
}

bool conforms(const nlohmann::json& value, const TypeHint& hint) {
  using K = TypeHint::Kind;
  switch (hint.kind) {
    case K::Unknown: return true;
    case K::Int: return value.is_number_integer();
    case K::Float: return value.is_number();
    case K::Bool: return value.is_boolean();
    case K::Str: return value.is_string();
    case K::List:
      if (!value.is_array()) return false;
      return std::all_of(value.begin(), value.end(),
                         [&](const nlohmann::json& v) { return conforms(v, hint.args.at(0)); });
    case K::Tuple:
      if (!value.is_array() || value.size() != hint.args.size()) return false;
      for (std::size_t i = 0; i < hint.args.size(); ++i) {
        if (!conforms(value[i], hint.args[i])) return false;
      }
      return true;
    case K::Dict:
      if (!value.is_object()) return false;
      for (const auto& [k, v] : value.items()) {
        if (hint.args.at(0).kind == K::Int && !is_integer_key(k)) return false;
        if (!conforms(v, hint.args.at(1))) return false;
      }
      return true;
  }
  return false;
}

}  // namespace sde
