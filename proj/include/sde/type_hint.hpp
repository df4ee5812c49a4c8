#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sde {

/// Coarse parameter type used to drive input generation.
struct TypeHint {
  enum class Kind { Int, Float, Bool, Str, List, Tuple, Dict, Unknown };

  Kind kind = Kind::Unknown;
  /// List: one element hint. Tuple: one per slot. Dict: key, value.
  std::vector<TypeHint> args;

  static TypeHint integer() { return {Kind::Int, {}}; }
  static TypeHint real() { return {Kind::Float, {}}; }
  static TypeHint boolean() { return {Kind::Bool, {}}; }
  static TypeHint str() { return {Kind::Str, {}}; }
  static TypeHint unknown() { return {Kind::Unknown, {}}; }
  static TypeHint list_of(TypeHint elem) { return {Kind::List, {std::move(elem)}}; }
  static TypeHint tuple_of(std::vector<TypeHint> slots) { return {Kind::Tuple, std::move(slots)}; }
  static TypeHint dict_of(TypeHint key, TypeHint value) {
    return {Kind::Dict, {std::move(key), std::move(value)}};
  }

  bool operator==(const TypeHint&) const = default;
};

inline constexpr int kMaxTypeDepth = 8;

/// Parses a Python/Java-flavoured annotation ("List[int]", "Optional[str]",
/// "int[]", "Dict[str, List[int]]"). Unrecognised names and anything nested
/// deeper than kMaxTypeDepth become Unknown.
TypeHint parse_annotation(std::string_view text);

/// Python-style rendering; parse_annotation(to_string(h)) == h.
std::string to_string(const TypeHint& hint);

/// Hint describing an existing value. Empty or mixed collections yield
/// Unknown element hints.
TypeHint hint_of(const nlohmann::json& value);

/// Lattice join: equal hints join to themselves, Unknown absorbs into the
/// other side, incompatible hints join to Unknown.
TypeHint join(const TypeHint& a, const TypeHint& b);

/// True when `value` has the shape `hint` describes. Unknown matches
/// anything.
bool conforms(const nlohmann::json& value, const TypeHint& hint);

}  // namespace sde
