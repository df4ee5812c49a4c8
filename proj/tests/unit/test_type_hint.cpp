#include <doctest.h>

#include "sde/type_hint.hpp"

using sde::TypeHint;
using nlohmann::json;

TEST_CASE("annotations parse to hints") {
  CHECK(sde::parse_annotation("int") == TypeHint::integer());
  CHECK(sde::parse_annotation("List[int]") == TypeHint::list_of(TypeHint::integer()));
  CHECK(sde::parse_annotation("typing.List[str]") == TypeHint::list_of(TypeHint::str()));
  CHECK(sde::parse_annotation("Optional[float]") == TypeHint::real());
  CHECK(sde::parse_annotation("int | None") == TypeHint::integer());
  CHECK(sde::parse_annotation("int[]") == TypeHint::list_of(TypeHint::integer()));
  CHECK(sde::parse_annotation("Dict[str, List[int]]") ==
        TypeHint::dict_of(TypeHint::str(), TypeHint::list_of(TypeHint::integer())));
  CHECK(sde::parse_annotation("Tuple[int, str]") == TypeHint::tuple_of({TypeHint::integer(), TypeHint::str()}));
  CHECK(sde::parse_annotation("Tuple[int, ...]") == TypeHint::list_of(TypeHint::integer()));
  CHECK(sde::parse_annotation("Widget") == TypeHint::unknown());
}

TEST_CASE("nesting beyond the depth limit degrades to Unknown") {
  std::string deep = "int";
  for (int i = 0; i < 12; ++i) deep = "List[" + deep + "]";
  TypeHint h = sde::parse_annotation(deep);
  int depth = 0;
  while (h.kind == TypeHint::Kind::List) {
    h = h.args.at(0);
    ++depth;
  }
  CHECK(depth <= sde::kMaxTypeDepth);
  CHECK(h == TypeHint::unknown());
}

TEST_CASE("to_string round-trips") {
  const TypeHint hints[] = {
      TypeHint::integer(),
      TypeHint::list_of(TypeHint::list_of(TypeHint::real())),
      TypeHint::dict_of(TypeHint::integer(), TypeHint::boolean()),
      TypeHint::tuple_of({TypeHint::str(), TypeHint::integer()}),
      TypeHint::unknown(),
  };
  for (const auto& h : hints) CHECK(sde::parse_annotation(sde::to_string(h)) == h);
}

TEST_CASE("join and hint_of") {
  CHECK(sde::join(TypeHint::integer(), TypeHint::real()) == TypeHint::real());
  CHECK(sde::join(TypeHint::unknown(), TypeHint::str()) == TypeHint::str());
  CHECK(sde::join(TypeHint::integer(), TypeHint::str()) == TypeHint::unknown());
  CHECK(sde::hint_of(json::parse("[1, 2.5]")) == TypeHint::list_of(TypeHint::real()));
  CHECK(sde::hint_of(json::parse("[]")) == TypeHint::list_of(TypeHint::unknown()));
}

TEST_CASE("conforms") {
  CHECK(sde::conforms(json(3), TypeHint::real()));
  CHECK_FALSE(sde::conforms(json(3.5), TypeHint::integer()));
  CHECK(sde::conforms(json::parse("[1,2]"), TypeHint::list_of(TypeHint::integer())));
  CHECK_FALSE(sde::conforms(json::parse("[1,\"a\"]"), TypeHint::list_of(TypeHint::integer())));
  CHECK(sde::conforms(json::parse("{\"1\": true}"), TypeHint::dict_of(TypeHint::integer(), TypeHint::boolean())));
  CHECK_FALSE(sde::conforms(json::parse("{\"x\": true}"), TypeHint::dict_of(TypeHint::integer(), TypeHint::boolean())));
  CHECK(sde::conforms(json::parse("[[1], \"s\"]"), TypeHint::unknown()));
}
