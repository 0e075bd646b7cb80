#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "apifuzz/json_value.hpp"
#include "apifuzz/util.hpp"
#include "apifuzz/yaml_io.hpp"

using namespace apifuzz;

TEST_CASE("undefined fields vanish on dump, null fields stay") {
  JsonValue with_undefined = JsonValue::object({{"x", JsonValue::undefined()}});
  CHECK(with_undefined.dump() == "{}");

  JsonValue with_null = JsonValue::object({{"x", JsonValue::null()}});
  CHECK(with_null.dump() == "{\"x\":null}");

  CHECK(JsonValue::undefined().dump() == "");
  CHECK(with_undefined != JsonValue::object({}));
  CHECK(with_undefined.strip_undefined() == JsonValue::object({}));
}

TEST_CASE("dump is compact and order preserving") {
  JsonValue v = JsonValue::object({
      {"b", JsonValue::number(1)},
      {"a", JsonValue::string("x")},
      {"list", JsonValue::array({JsonValue::boolean(true), JsonValue::null()})},
  });
  CHECK(v.dump() == "{\"b\":1,\"a\":\"x\",\"list\":[true,null]}");
}

TEST_CASE("string escaping") {
  JsonValue v = JsonValue::object({{"a", JsonValue::string("x\"y\nz\x01")}});
  CHECK(v.dump() == "{\"a\":\"x\\\"y\\nz\\u0001\"}");
  auto back = JsonValue::parse(v.dump());
  REQUIRE(back);
  CHECK(*back == v);
}

TEST_CASE("parse keeps field order and number text") {
  auto v = JsonValue::parse("{\"z\":1,\"a\":3.14,\"big\":12345678901234}");
  REQUIRE(v);
  CHECK(v->fields()[0].first == "z");
  CHECK(v->fields()[1].first == "a");
  CHECK(v->get("a")->number_text() == "3.14");
  CHECK(v->get("big")->as_int() == 12345678901234LL);
  CHECK(!v->get("a")->as_int().has_value());
}

TEST_CASE("parse rejects malformed input with an error message") {
  std::string err;
  CHECK(!JsonValue::parse("{\"a\":", &err));
  CHECK(!err.empty());
  CHECK(!JsonValue::parse("", &err));
}

namespace {

JsonValue random_value(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth >= 3 ? 4 : 6);
  switch (pick(rng)) {
    case 0: return JsonValue::null();
    case 1: return JsonValue::boolean(rng() % 2 == 0);
    case 2: return JsonValue::number(static_cast<long long>(rng() % 100000) - 50000);
    case 3: return JsonValue::string("s" + std::to_string(rng() % 1000) + "\"\\\n");
    case 4: return JsonValue::undefined();
    case 5: {
      std::vector<JsonValue> items;
      for (size_t i = 0, n = rng() % 4; i < n; ++i) items.push_back(random_value(rng, depth + 1));
      return JsonValue::array(std::move(items));
    }
    default: {
      std::vector<JsonValue::Field> fields;
      for (size_t i = 0, n = rng() % 4; i < n; ++i)
        fields.emplace_back("k" + std::to_string(i), random_value(rng, depth + 1));
      return JsonValue::object(std::move(fields));
    }
  }
}

}  // namespace

TEST_CASE("round trip: parse(dump(v)) equals v with undefined stripped") {
  std::mt19937 rng(20240811);
  for (int i = 0; i < 500; ++i) {
    JsonValue v = JsonValue::object({{"root", random_value(rng, 0)}});
    JsonValue expect = v.strip_undefined();
    auto back = JsonValue::parse(v.dump());
    REQUIRE(back);
    CHECK(*back == expect);
    // dump itself must be stable
    CHECK(back->dump() == expect.dump());
  }
}

TEST_CASE("walk follows slash paths through objects and arrays") {
  auto v = JsonValue::parse("{\"data\":{\"id\":5,\"tags\":[\"a\",\"b\"]}}");
  REQUIRE(v);
  REQUIRE(v->walk("data/id"));
  CHECK(v->walk("data/id")->number_text() == "5");
  CHECK(v->walk("data/tags/1")->as_string() == "b");
  CHECK(v->walk("") == v->walk(""));
  CHECK(v->walk("data/missing") == nullptr);
  CHECK(v->walk("data/tags/7") == nullptr);
}

TEST_CASE("pointer normalization accepts every documented spelling") {
  CHECK(normalize_pointer("$response.body#/data/id") == "data/id");
  CHECK(normalize_pointer("#/a/b") == "a/b");
  CHECK(normalize_pointer("/a/b") == "a/b");
  CHECK(normalize_pointer("a.b") == "a/b");
  CHECK(normalize_pointer("a/b") == "a/b");
  CHECK(normalize_pointer("token.authToken") == "token/authToken");
  CHECK(normalize_pointer("token") == "token");
  auto segs = split_pointer("data/id");
  REQUIRE(segs.size() == 2);
  CHECK(segs[0] == "data");
  CHECK(segs[1] == "id");
  CHECK(split_pointer("").empty());
}

TEST_CASE("display string renders scalars bare") {
  CHECK(JsonValue::string("abc").to_display_string() == "abc");
  CHECK(JsonValue::number(42LL).to_display_string() == "42");
  CHECK(JsonValue::boolean(false).to_display_string() == "false");
  CHECK(JsonValue::null().to_display_string() == "null");
  CHECK(JsonValue::array({JsonValue::number(1LL)}).to_display_string() == "[1]");
}

TEST_CASE("duration parsing") {
  CHECK(parse_duration("30s") == Millis(30000));
  CHECK(parse_duration("10m") == Millis(600000));
  CHECK(parse_duration("1h") == Millis(3600000));
  CHECK(parse_duration("500ms") == Millis(500));
  CHECK(parse_duration("250") == Millis(250));
  CHECK_THROWS_AS(parse_duration("abc"), ConfigError);
  CHECK_THROWS_AS(parse_duration(""), ConfigError);
  CHECK_THROWS_AS(parse_duration("10x"), ConfigError);
  CHECK_THROWS_AS(parse_duration("-5s"), ConfigError);
}

TEST_CASE("singularize and noun matching") {
  CHECK(singularize("users") == "user");
  CHECK(singularize("parties") == "party");
  CHECK(singularize("statuses") == "status");
  CHECK(singularize("address") == "address");
  CHECK(singularize("user") == "user");
  CHECK(nouns_match("users", "user"));
  CHECK(nouns_match("user", "users"));
  CHECK(nouns_match("user", "user"));
  CHECK(!nouns_match("users", "products"));
  CHECK(pascal_case("users") == "Users");
  CHECK(pascal_case("u") == "U");
}

TEST_CASE("url encoding") {
  CHECK(url_encode("abcXYZ019.-_~") == "abcXYZ019.-_~");
  CHECK(url_encode("a b/c&d=e") == "a%20b%2Fc%26d%3De");
}

TEST_CASE("yaml parsing with implicit typing") {
  auto v = parse_yaml("a: 1\nb: [x, true, null]\nc: '01'\nd: 2.5\n");
  REQUIRE(v);
  CHECK(v->get("a")->number_text() == "1");
  CHECK(v->get("b")->items()[0].as_string() == "x");
  CHECK(v->get("b")->items()[1].as_bool() == true);
  CHECK(v->get("b")->items()[2].is_null());
  CHECK(v->get("c")->as_string() == "01");
  CHECK(v->get("d")->is_number());
}

TEST_CASE("document sniffing picks JSON for brace-led text") {
  auto v = parse_document("  {\"openapi\": \"3.0.0\"}");
  REQUIRE(v);
  CHECK(v->get("openapi")->as_string() == "3.0.0");
  auto y = parse_document("openapi: 3.0.0\n");
  REQUIRE(y);
  CHECK(y->get("openapi")->as_string() == "3.0.0");
  std::string err;
  CHECK(!parse_document("{\"a\": oops}", &err));
}
