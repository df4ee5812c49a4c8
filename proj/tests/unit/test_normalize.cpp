#include <doctest.h>

#include <cstdio>
#include <random>

#include "sde/error.hpp"
#include "sde/normalize.hpp"

TEST_CASE("normalize examples") {
  CHECK(sde::normalize("42\n") == "42");
  CHECK(sde::normalize("0.30000000000000004") == "0.300000000");
  CHECK(sde::normalize("{\"b\":1, \"a\":2}") == "{\"a\":2,\"b\":1}");
  CHECK(sde::normalize("a  \nb \n\n") == "a\nb");
  CHECK(sde::normalize("[1, 2,3]") == "[1,2,3]");
  CHECK(sde::normalize("0 100\n") == "0 100");
}

TEST_CASE("float tokens use nine significant digits") {
  // oracle: the C library's own %.9g rendering of the same double
  for (double v : {0.1, 1.0 / 3.0, 2.5e-7, 123456789.123, -42.125}) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%#.9g", v);
    std::string expected = buf;
    if (expected.back() == '.') expected += '0';
    CHECK(sde::format_float(v) == expected);
  }
  CHECK(sde::normalize("x = 1.5") == "x = 1.50000000");
  CHECK(sde::normalize("[1.0, 2]") == "[1.00000000,2]");
}

TEST_CASE("integers keep full precision") {
  CHECK(sde::normalize("123456789012345678901234567890") == "123456789012345678901234567890");
  CHECK(sde::normalize("[12345678901234567890123]") == "[12345678901234567890123]");
}

TEST_CASE("non-finite json literals") {
  CHECK(sde::normalize("[NaN, Infinity, -Infinity]") == "[NaN,Infinity,-Infinity]");
}

TEST_CASE("invalid utf-8 is replaced, undecodable output throws") {
  const std::string mixed = std::string("ok") + static_cast<char>(0xff);
  CHECK(sde::normalize(mixed) == "ok\xEF\xBF\xBD");
  const std::string garbage(3, static_cast<char>(0xff));
  CHECK_THROWS_AS(sde::normalize(garbage), sde::Error);
  CHECK(sde::normalize("") == "");
}

TEST_CASE("normalize is idempotent on random text") {
  std::mt19937_64 gen(7);
  const std::string alphabet = "0123456789 .-+eE\n\t{}[]\":,abcNInfty";
  for (int trial = 0; trial < 3000; ++trial) {
    std::string s;
    const auto len = gen() % 24;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[gen() % alphabet.size()];
    std::string once;
    try {
      once = sde::normalize(s);
    } catch (const sde::Error&) {
      continue;
    }
    INFO("input: " << s);
    CHECK(sde::normalize(once) == once);
  }
}

TEST_CASE("raw_member extracts spans verbatim") {
  const auto raw = sde::raw_member(R"({"id":1,"output":[1.5, 100000000000000000000],"status":"ok"})", "output");
  REQUIRE(raw);
  CHECK(*raw == "[1.5, 100000000000000000000]");
  CHECK_FALSE(sde::raw_member("[1,2]", "output"));
}
