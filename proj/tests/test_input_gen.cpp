#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <regex>
#include <set>

#include "apifuzz/input_gen.hpp"

using namespace apifuzz;

namespace {

ValueSchema string_schema() {
  ValueSchema s;
  s.type = ValueSchema::Type::String;
  return s;
}

ValueSchema integer_schema() {
  ValueSchema s;
  s.type = ValueSchema::Type::Integer;
  return s;
}

}  // namespace

TEST_CASE("enum schemas only ever emit members") {
  ValueSchema s = integer_schema();
  s.enum_values = {JsonValue::number(1), JsonValue::number(2), JsonValue::number(3)};
  GenContext ctx(GenConfig{.seed = 7});
  std::set<long long> seen;
  for (int i = 0; i < 200; ++i) {
    JsonValue v = gen_value(s, ctx);
    REQUIRE(v.as_int().has_value());
    long long n = *v.as_int();
    CHECK(n >= 1);
    CHECK(n <= 3);
    seen.insert(n);
  }
  CHECK(seen.size() == 3);
}

TEST_CASE("example probability 1.0 always answers from the examples") {
  ValueSchema s = string_schema();
  s.examples = {JsonValue::string("alpha"), JsonValue::string("beta")};
  GenConfig cfg;
  cfg.seed = 3;
  cfg.example_probability = 1.0;
  GenContext ctx(cfg);
  std::set<std::string> seen;
  for (int i = 0; i < 100; ++i) {
    JsonValue v = gen_value(s, ctx, "query.q");
    REQUIRE(v.is_string());
    CHECK((v.as_string() == "alpha" || v.as_string() == "beta"));
    seen.insert(v.as_string());
  }
  CHECK(seen.size() == 2);
  CHECK(ctx.used_examples.size() == 100);
  CHECK(ctx.used_examples[0].slot == "query.q");
}

TEST_CASE("example probability 0 never touches examples") {
  ValueSchema s = string_schema();
  s.examples = {JsonValue::string("alpha")};
  GenConfig cfg;
  cfg.seed = 3;
  cfg.example_probability = 0.0;
  GenContext ctx(cfg);
  for (int i = 0; i < 50; ++i) gen_value(s, ctx);
  CHECK(ctx.used_examples.empty());
}

TEST_CASE("length and range constraints are honored") {
  ValueSchema s = string_schema();
  s.min_length = 4;
  s.max_length = 6;
  GenContext ctx(GenConfig{.seed = 11});
  for (int i = 0; i < 200; ++i) {
    JsonValue v = gen_value(s, ctx);
    CHECK(v.as_string().size() >= 4);
    CHECK(v.as_string().size() <= 6);
  }

  ValueSchema n = integer_schema();
  n.minimum = -3;
  n.maximum = 9;
  for (int i = 0; i < 200; ++i) {
    JsonValue v = gen_value(n, ctx);
    REQUIRE(v.as_int().has_value());
    CHECK(*v.as_int() >= -3);
    CHECK(*v.as_int() <= 9);
  }
}

TEST_CASE("unsatisfiable bounds warn and still produce a value") {
  ValueSchema n = integer_schema();
  n.minimum = 10;
  n.maximum = 5;
  std::vector<SchemaWarning> warnings;
  GenContext ctx(GenConfig{.seed = 1});
  ctx.warnings = &warnings;
  JsonValue v = gen_value(n, ctx);
  CHECK(v.as_int() == 10);
  REQUIRE(!warnings.empty());
  CHECK(warnings[0].code == warning_code::kUnsatisfiableConstraints);
}

TEST_CASE("regex-constrained strings match their pattern, 1000 samples") {
  const char* patterns[] = {
      "^[a-z]{3}-[0-9]{2}$",
      "^(GET|PUT|POST)$",
      "[A-F0-9]{8}",
      "^u_[a-z0-9]+$",
      "^\\d{4}-\\d{2}-\\d{2}$",
      "^x(yz)?[0-9]*$",
      "^[^0-9]{2,5}$",
      "ab+c?d{2,}",
  };
  GenContext ctx(GenConfig{.seed = 99});
  for (const char* pattern : patterns) {
    ValueSchema s = string_schema();
    s.pattern = pattern;
    std::regex oracle(pattern, std::regex_constants::ECMAScript);
    for (int i = 0; i < 125; ++i) {
      JsonValue v = gen_value(s, ctx);
      REQUIRE(v.is_string());
      CAPTURE(pattern);
      CAPTURE(v.as_string());
      CHECK(std::regex_search(v.as_string(), oracle));
    }
  }
}

TEST_CASE("regex walker handles alternation groups and classes directly") {
  Rng rng(5);
  auto a = gen_from_regex("(ab|cd)[0-9]\\d", rng);
  REQUIRE(a.has_value());
  std::regex oracle("(ab|cd)[0-9]\\d");
  CHECK(std::regex_search(*a, oracle));
  CHECK(!gen_from_regex("(?=look)ahead", rng).has_value());
  CHECK(!gen_from_regex("back\\1ref", rng).has_value());
}

TEST_CASE("determinism: same seed, same sequence") {
  ValueSchema s;
  s.type = ValueSchema::Type::Object;
  SchemaField req{"id", true, integer_schema()};
  SchemaField opt{"note", false, string_schema()};
  s.fields = {req, opt};

  auto run = [&]() {
    GenContext ctx(GenConfig{.seed = 42});
    std::string out;
    for (int i = 0; i < 50; ++i) out += gen_value(s, ctx).dump() + "\n";
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("example object completion keeps given fields, fills required, leaves optionals") {
  ValueSchema s;
  s.type = ValueSchema::Type::Object;
  // 10 fields: foo/bar in the example, x1..x3 required, o1..o5 optional
  s.fields.push_back({"foo", false, string_schema()});
  s.fields.push_back({"bar", false, string_schema()});
  for (const char* name : {"x1", "x2", "x3"}) s.fields.push_back({name, true, integer_schema()});
  for (const char* name : {"o1", "o2", "o3", "o4", "o5"})
    s.fields.push_back({name, false, string_schema()});

  JsonValue partial = JsonValue::object({{"foo", JsonValue::string("a")},
                                         {"bar", JsonValue::string("d")}});
  GenContext ctx(GenConfig{.seed = 8});
  JsonValue out = complete_example_object(s, partial, ctx);

  CHECK(out.get("foo")->as_string() == "a");
  CHECK(out.get("bar")->as_string() == "d");
  for (const char* name : {"x1", "x2", "x3"}) {
    REQUIRE(out.get(name));
    CHECK(out.get(name)->is_number());
  }
  for (const char* name : {"o1", "o2", "o3", "o4", "o5"}) {
    REQUIRE(out.get(name));
    CHECK(out.get(name)->is_undefined());
  }
  // serialized form carries only the example plus required fields
  auto parsed = JsonValue::parse(out.dump());
  REQUIRE(parsed);
  CHECK(parsed->size() == 5);
}

TEST_CASE("500 completions never break the partial's co-occurrence") {
  ValueSchema s;
  s.type = ValueSchema::Type::Object;
  s.fields.push_back({"foo", false, string_schema()});
  s.fields.push_back({"bar", false, string_schema()});
  s.fields.push_back({"id", true, integer_schema()});
  JsonValue partial = JsonValue::object({{"foo", JsonValue::string("a")},
                                         {"bar", JsonValue::string("d")}});
  GenContext ctx(GenConfig{.seed = 13});
  for (int i = 0; i < 500; ++i) {
    JsonValue out = complete_example_object(s, partial, ctx);
    CHECK(out.get("foo")->as_string() == "a");
    CHECK(out.get("bar")->as_string() == "d");
    CHECK(out.get("id")->is_number());
  }
}

TEST_CASE("unknown example fields are kept with a warning") {
  ValueSchema s;
  s.type = ValueSchema::Type::Object;
  s.fields.push_back({"known", false, string_schema()});
  JsonValue partial = JsonValue::object({{"mystery", JsonValue::number(1)}});
  std::vector<SchemaWarning> warnings;
  GenContext ctx(GenConfig{.seed = 2});
  ctx.warnings = &warnings;
  JsonValue out = complete_example_object(s, partial, ctx);
  REQUIRE(out.get("mystery"));
  CHECK(out.get("mystery")->number_text() == "1");
  REQUIRE(!warnings.empty());
  CHECK(warnings[0].code == warning_code::kExtraExampleField);
}

namespace {

EndpointSpec endpoint_with(int optionals, std::vector<JsonValue> enum_values) {
  EndpointSpec ep;
  ep.verb = "get";
  ep.path = "/x";
  for (int i = 0; i < optionals; ++i) {
    ParamSpec p;
    p.name = "q" + std::to_string(i);
    p.location = ParamLocation::Query;
    p.required = false;
    p.schema.type = ValueSchema::Type::String;
    ep.params.push_back(p);
  }
  if (!enum_values.empty()) {
    ParamSpec p;
    p.name = "mode";
    p.location = ParamLocation::Query;
    p.required = true;
    p.schema.type = ValueSchema::Type::String;
    p.schema.enum_values = std::move(enum_values);
    ep.params.push_back(p);
  }
  return ep;
}

}  // namespace

TEST_CASE("two optional params and no enums give four presence combinations") {
  auto combos = enum_and_optional_combinations(endpoint_with(2, {}), 0);
  REQUIRE(combos.size() == 4);
  std::set<std::string> masks;
  for (const auto& c : combos) masks.insert(c.presence_mask);
  CHECK(masks == std::set<std::string>{"00", "10", "01", "11"});
  for (const auto& c : combos) CHECK(!c.enum_param.has_value());
}

TEST_CASE("a ten-value enum with no optionals gives ten assignments") {
  std::vector<JsonValue> values;
  for (int i = 0; i < 10; ++i) values.push_back(JsonValue::string("v" + std::to_string(i)));
  auto combos = enum_and_optional_combinations(endpoint_with(0, std::move(values)), 0);
  REQUIRE(combos.size() == 10);
  for (size_t i = 0; i < combos.size(); ++i) {
    CHECK(combos[i].enum_param == "mode");
    CHECK(combos[i].enum_index == i);
  }
}

TEST_CASE("three optionals with a three-value enum cap at twenty") {
  std::vector<JsonValue> values = {JsonValue::string("a"), JsonValue::string("b"),
                                   JsonValue::string("c")};
  auto first = enum_and_optional_combinations(endpoint_with(3, values), 20);
  REQUIRE(first.size() == 20);  // 2^3 * 3 = 24, truncated
  auto second = enum_and_optional_combinations(endpoint_with(3, values), 20);
  REQUIRE(second.size() == 20);
  for (size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].presence_mask == second[i].presence_mask);
    CHECK(first[i].enum_index == second[i].enum_index);
  }
  // presence varies fastest: the first eight share the first enum value
  for (size_t i = 0; i < 8; ++i) CHECK(first[i].enum_index == 0);
  CHECK(first[8].enum_index == 1);
}

TEST_CASE("presence masks switch to on/off pairs past eight parameters") {
  auto small = presence_masks(3);
  CHECK(small.size() == 8);
  auto big = presence_masks(10);
  CHECK(big.size() == 2 + 2 * 10);
  CHECK(big.front() == "0000000000");
  CHECK(big.back() == "1111111111");
}

TEST_CASE("nullable schemas may emit explicit null") {
  ValueSchema s = string_schema();
  s.nullable = true;
  GenContext ctx(GenConfig{.seed = 21});
  bool saw_null = false;
  for (int i = 0; i < 300 && !saw_null; ++i) saw_null = gen_value(s, ctx).is_null();
  CHECK(saw_null);
}

TEST_CASE("composite oneOf picks a declared branch") {
  ValueSchema s;
  s.type = ValueSchema::Type::Composite;
  s.composite_kind = ValueSchema::CompositeKind::OneOf;
  s.branches = {string_schema(), integer_schema()};
  GenContext ctx(GenConfig{.seed = 4});
  bool saw_string = false, saw_int = false;
  for (int i = 0; i < 100; ++i) {
    JsonValue v = gen_value(s, ctx);
    saw_string |= v.is_string();
    saw_int |= v.is_number();
  }
  CHECK(saw_string);
  CHECK(saw_int);
}

TEST_CASE("composite allOf merges object branches, later fields win") {
  ValueSchema a;
  a.type = ValueSchema::Type::Object;
  a.fields.push_back({"id", true, integer_schema()});
  ValueSchema b;
  b.type = ValueSchema::Type::Object;
  SchemaField id_override{"id", true, string_schema()};
  id_override.schema.enum_values = {JsonValue::string("fixed")};
  b.fields.push_back(id_override);
  b.fields.push_back({"name", true, string_schema()});

  ValueSchema all;
  all.type = ValueSchema::Type::Composite;
  all.composite_kind = ValueSchema::CompositeKind::AllOf;
  all.branches = {a, b};

  GenContext ctx(GenConfig{.seed = 31});
  JsonValue v = gen_value(all, ctx);
  REQUIRE(v.is_object());
  REQUIRE(v.get("id"));
  CHECK(v.get("id")->as_string() == "fixed");
  CHECK(v.get("name"));
}
