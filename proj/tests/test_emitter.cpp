#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "apifuzz/emitter.hpp"
#include "apifuzz/engine.hpp"
#include "apifuzz/fixtures.hpp"
#include "apifuzz/json_value.hpp"
#include "apifuzz/yaml_io.hpp"
#include "support.hpp"

using namespace apifuzz;

namespace {

/// Responses exercising every schema-check rule: exact/wildcard/default
/// status matching, required properties, primitive acceptance, composites.
constexpr const char* kFaultsSchema = R"(
openapi: 3.0.0
info: {title: faults}
paths:
  "/user":
    get:
      operationId: getUser
      responses:
        '200':
          description: OK
          content:
            application/json:
              schema:
                type: object
                required: [id, name]
                properties:
                  id: {type: string}
                  name: {type: string}
                  errrors: {type: string}
        '404': {description: absent}
  "/wild":
    get:
      operationId: getWild
      responses:
        '200':
          description: OK
          content:
            application/json:
              schema:
                type: object
                required: [a]
                properties:
                  a: {type: string}
        '2XX':
          description: other success
          content:
            application/json:
              schema:
                type: object
                required: [w]
                properties:
                  w: {type: string}
  "/def":
    get:
      operationId: getDef
      responses:
        '204': {description: empty}
        'default':
          description: catch-all
          content:
            application/json:
              schema:
                type: object
                required: [d]
                properties:
                  d: {type: string}
  "/stats":
    get:
      operationId: getStats
      responses:
        '200':
          description: OK
          content:
            application/json:
              schema:
                type: object
                properties:
                  count: {type: integer}
                  ratio: {type: number}
                  note: {type: string, nullable: true}
                  mixed:
                    oneOf:
                    - {type: string}
                    - {type: integer}
                  tags:
                    type: array
                    items: {type: string}
                  combo:
                    allOf:
                    - type: object
                      required: [x]
                      properties:
                        x: {type: string}
                    - type: object
                      required: [y]
                      properties:
                        y: {type: string}
)";

ApiModel model_from(const std::string& text) {
  auto graph = test_support::load_graph(text);
  auto [model, warnings] = build_model(graph);
  return model;
}

const EndpointSpec* find_endpoint(const ApiModel& model, const std::string& verb,
                                  const std::string& path) {
  for (const auto& ep : model.endpoints)
    if (ep.verb == verb && ep.path == path) return &ep;
  return nullptr;
}

HttpAction action_on(const EndpointSpec* ep) {
  HttpAction a;
  if (ep != nullptr) {
    a.verb = ep->verb;
    a.path_template = ep->path;
  }
  a.endpoint = ep;
  return a;
}

RecordedExchange exchange(int status, const std::string& body_text) {
  RecordedExchange ex;
  ex.status = status;
  ex.raw_body = body_text;
  if (auto parsed = JsonValue::parse(body_text))
    ex.body = std::move(*parsed);
  else if (!body_text.empty())
    ex.body = JsonValue::string(body_text);
  return ex;
}

}  // namespace

TEST_CASE("schema-mismatch faults carry the full documented message") {
  const ApiModel model = model_from(kFaultsSchema);
  const HttpAction get_user = action_on(find_endpoint(model, "get", "/user"));
  REQUIRE(get_user.endpoint != nullptr);

  SUBCASE("null in a string field") {
    auto fault = classify_fault(get_user, exchange(200, R"({"id":"x","name":"y","errrors":null})"));
    REQUIRE(fault.has_value());
    CHECK(fault->code == 101);
    CHECK(fault->type_key == "validation.response.body.schema.type");
    CHECK(fault->pointer == "/errrors");
    CHECK(fault->instance_type == "null");
    CHECK(fault->allowed == std::vector<std::string>{"string"});
    CHECK(fault->message ==
          "Fault101. Received A Response From API With A Structure/Data That Is Not Matching "
          "Its Schema. Type: validation.response.body.schema.type. [Path '/errrors'] Instance "
          "type (null) does not match any allowed primitive type (allowed: [\"string\"])");
  }

  SUBCASE("missing required properties, reported sorted") {
    auto fault = classify_fault(get_user, exchange(200, R"({"errrors":"fine"})"));
    REQUIRE(fault.has_value());
    CHECK(fault->code == 101);
    CHECK(fault->type_key == "validation.response.body.schema.required");
    CHECK(fault->pointer == "");
    CHECK(fault->message ==
          "Fault101. Received A Response From API With A Structure/Data That Is Not Matching "
          "Its Schema. Type: validation.response.body.schema.required. [Path ''] Object has "
          "missing required properties ([\"id\", \"name\"])");
  }

  SUBCASE("extra fields are never faults") {
    CHECK_FALSE(classify_fault(
        get_user, exchange(200, R"({"id":"x","name":"y","errrors":"ok","extra":3})")));
  }

  SUBCASE("server errors are the 100 class") {
    auto fault = classify_fault(get_user, exchange(500, R"({"whatever":1})"));
    REQUIRE(fault.has_value());
    CHECK(fault->code == 100);
    CHECK(fault->message ==
          "Fault100. Received A 5xx Server Error Response From API. Type: "
          "http.response.status.5xx. [Status '500']");
  }

  SUBCASE("4xx responses are correct behavior, declared or not") {
    CHECK_FALSE(classify_fault(get_user, exchange(404, R"({"error":"gone"})")));
    CHECK_FALSE(classify_fault(get_user, exchange(403, R"({"error":"no"})")));
  }

  SUBCASE("undeclared success statuses are schema faults") {
    auto fault = classify_fault(get_user, exchange(204, ""));
    REQUIRE(fault.has_value());
    CHECK(fault->code == 101);
    CHECK(fault->type_key == "validation.response.status.undeclared");
    CHECK(fault->message ==
          "Fault101. Received A Response From API With A Structure/Data That Is Not Matching "
          "Its Schema. Type: validation.response.status.undeclared. [Status '204'] Status code "
          "204 is not declared in the schema");
  }

  SUBCASE("transport failures and synthetic actions classify as nothing") {
    CHECK_FALSE(classify_fault(get_user, exchange(0, "")));
    HttpAction synthetic;
    synthetic.verb = "post";
    CHECK_FALSE(classify_fault(synthetic, exchange(200, "{}")));
  }

  SUBCASE("empty bodies skip the schema check") {
    CHECK_FALSE(classify_fault(get_user, exchange(200, "")));
  }

  SUBCASE("non-JSON bodies mismatch the object schema at the root") {
    auto fault = classify_fault(get_user, exchange(200, "oops not json"));
    REQUIRE(fault.has_value());
    CHECK(fault->pointer == "");
    CHECK(fault->instance_type == "string");
    CHECK(fault->allowed == std::vector<std::string>{"object"});
  }
}

TEST_CASE("declared-response matching prefers exact over wildcard over default") {
  const ApiModel model = model_from(kFaultsSchema);
  const HttpAction get_wild = action_on(find_endpoint(model, "get", "/wild"));
  const HttpAction get_def = action_on(find_endpoint(model, "get", "/def"));
  REQUIRE(get_wild.endpoint != nullptr);
  REQUIRE(get_def.endpoint != nullptr);

  auto exact = classify_fault(get_wild, exchange(200, "{}"));
  REQUIRE(exact.has_value());
  CHECK(exact->message.find("([\"a\"])") != std::string::npos);

  auto wildcard = classify_fault(get_wild, exchange(201, "{}"));
  REQUIRE(wildcard.has_value());
  CHECK(wildcard->type_key == "validation.response.body.schema.required");
  CHECK(wildcard->message.find("([\"w\"])") != std::string::npos);

  auto fallback = classify_fault(get_def, exchange(200, "{}"));
  REQUIRE(fallback.has_value());
  CHECK(fallback->message.find("([\"d\"])") != std::string::npos);

  CHECK_FALSE(classify_fault(get_def, exchange(204, "")));
}

TEST_CASE("primitive acceptance mirrors JSON Schema instance typing") {
  const ApiModel model = model_from(kFaultsSchema);
  const HttpAction get_stats = action_on(find_endpoint(model, "get", "/stats"));
  REQUIRE(get_stats.endpoint != nullptr);

  SUBCASE("an integer instance satisfies a number schema") {
    CHECK_FALSE(classify_fault(get_stats, exchange(200, R"({"count":3,"ratio":7})")));
    CHECK_FALSE(classify_fault(get_stats, exchange(200, R"({"count":-4,"ratio":2.5})")));
  }

  SUBCASE("a fractional instance violates an integer schema") {
    auto fault = classify_fault(get_stats, exchange(200, R"({"count":2.5})"));
    REQUIRE(fault.has_value());
    CHECK(fault->pointer == "/count");
    CHECK(fault->instance_type == "number");
    CHECK(fault->allowed == std::vector<std::string>{"integer"});
  }

  SUBCASE("nullable fields accept null") {
    CHECK_FALSE(classify_fault(get_stats, exchange(200, R"({"note":null})")));
  }

  SUBCASE("one-of passes on any conforming branch") {
    CHECK_FALSE(classify_fault(get_stats, exchange(200, R"({"mixed":"x"})")));
    CHECK_FALSE(classify_fault(get_stats, exchange(200, R"({"mixed":3})")));
    auto fault = classify_fault(get_stats, exchange(200, R"({"mixed":true})"));
    REQUIRE(fault.has_value());
    CHECK(fault->pointer == "/mixed");
    CHECK(fault->allowed == std::vector<std::string>{"string", "integer"});
  }

  SUBCASE("array items are checked element-wise") {
    auto fault = classify_fault(get_stats, exchange(200, R"({"tags":["a",3]})"));
    REQUIRE(fault.has_value());
    CHECK(fault->pointer == "/tags/1");
    CHECK(fault->instance_type == "integer");
  }

  SUBCASE("all-of requires every branch") {
    CHECK_FALSE(classify_fault(get_stats, exchange(200, R"({"combo":{"x":"1","y":"2"}})")));
    auto fault = classify_fault(get_stats, exchange(200, R"({"combo":{"x":"1"}})"));
    REQUIRE(fault.has_value());
    CHECK(fault->pointer == "/combo");
    CHECK(fault->message.find("([\"y\"])") != std::string::npos);
  }
}

TEST_CASE("test names follow the verb-noun-outcome pattern") {
  SUBCASE("mismatch faults name the faulting action") {
    TestCase test;
    HttpAction create;
    create.verb = "post";
    create.path_template = "/api/links/create";
    test.actions.push_back(create);
    HttpAction get;
    get.verb = "get";
    get.path_template = "/api/links/users/{name}/{code}";
    test.actions.push_back(get);

    RecordedExchange ok = exchange(200, "{}");
    RecordedExchange bad = exchange(200, "{}");
    bad.fault_code = 101;
    CHECK(name_test(1, test, {ok, bad}) == "test_1_getOnUserReturnsMismatchResponseWithSchema");
  }

  SUBCASE("plain successes name the last main action with its status") {
    TestCase test;
    HttpAction get;
    get.verb = "get";
    get.path_template = "/api/items";
    test.actions.push_back(get);
    CHECK(name_test(0, test, {exchange(200, "{}")}) == "test_0_getOnItemsReturns200");
  }

  SUBCASE("plural nouns stay plural without trailing parameters") {
    TestCase test;
    HttpAction get;
    get.verb = "get";
    get.path_template = "/api/items";
    test.actions.push_back(get);
    CHECK(name_test(2, test, {exchange(500, "{}")}) == "test_2_getOnItemsReturns500");
    CHECK(name_test(3, test, {exchange(0, "")}) == "test_3_getOnItemsReturnsNoResponse");
  }

  SUBCASE("login and cleanup steps never name the test") {
    TestCase test;
    HttpAction login;
    login.verb = "post";
    login.path_template = "/api/login";
    login.is_login = true;
    test.actions.push_back(login);
    HttpAction get;
    get.verb = "get";
    get.path_template = "/api/items";
    test.actions.push_back(get);
    HttpAction del;
    del.verb = "delete";
    del.path_template = "/api/items/{id}";
    del.is_cleanup = true;
    test.actions.push_back(del);

    const std::vector<RecordedExchange> exchanges = {exchange(200, "{}"), exchange(200, "{}"),
                                                     exchange(204, "")};
    CHECK(name_test(0, test, exchanges) == "test_0_getOnItemsReturns200");
  }
}

TEST_CASE("summaries reproduce the documented block layout") {
  const ApiModel model = model_from(test_support::kLinksSchema);
  const EndpointSpec* create = find_endpoint(model, "post", "/api/links/create");
  const EndpointSpec* get_user = find_endpoint(model, "get", "/api/links/users/{name}/{code}");
  REQUIRE(create != nullptr);
  REQUIRE(get_user != nullptr);

  TestCase test;
  test.actions.push_back(action_on(create));
  HttpAction follow = action_on(get_user);
  follow.via_link = "LinkToGetUser";
  follow.via_link_source = 0;
  test.actions.push_back(follow);

  RecordedExchange first = exchange(200, R"({"data":{"id":"u1","code":7}})");
  RecordedExchange second = exchange(200, R"({"errrors":null})");
  second.fault_code = 101;

  SUBCASE("calls, faults and links") {
    CHECK(summarize(test, {first, second}) ==
          "Calls:\n"
          "1 - (200) POST:/api/links/create\n"
          "2 - (200) GET:/api/links/users/{name}/{code}\n"
          "Found 1 potential fault of type-code 101\n"
          "Followed 1 link:\n"
          "  200:LinkToGetUser");
  }

  SUBCASE("login steps disappear from the numbering") {
    HttpAction login;
    login.verb = "post";
    login.path_template = "/api/login";
    login.is_login = true;
    test.actions.insert(test.actions.begin(), login);
    const std::string block = summarize(test, {exchange(200, "{}"), first, second});
    CHECK(block.find("1 - (200) POST:/api/links/create") != std::string::npos);
    CHECK(block.find("/api/login") == std::string::npos);
  }

  SUBCASE("broken links are not reported as followed") {
    RecordedExchange broken = second;
    broken.link_broken = true;
    broken.fault_code = 0;
    CHECK(summarize(test, {first, broken}) ==
          "Calls:\n"
          "1 - (200) POST:/api/links/create\n"
          "2 - (200) GET:/api/links/users/{name}/{code}");
  }

  SUBCASE("example usage is listed slot by slot") {
    TestCase simple;
    HttpAction get = action_on(get_user);
    get.via_link.clear();
    get.example_uses.emplace_back("query.q", 0);
    simple.actions.push_back(get);
    CHECK(summarize(simple, {exchange(200, "{}")}) ==
          "Calls:\n"
          "1 - (200) GET:/api/links/users/{name}/{code}\n"
          "Used 1 example:\n"
          "  query.q[0]");
  }
}

TEST_CASE("suite yaml is deterministic, parseable and symbolic") {
  FixtureHub hub;
  SimClock clock;
  InProcessTransport transport(hub.router(), &clock, Millis(10));
  const ApiModel model = model_from(FixtureHub::links_schema());
  SessionConfig cfg;
  cfg.max_time = Millis(20000);
  cfg.seed = 42;
  auto [archive, stats] = run_session(model, nullptr, derive_targets(model), cfg, transport,
                                      clock);
  const auto plans = make_plans(minimized_entries(archive));
  REQUIRE(!plans.empty());

  for (const auto& plan : plans) {
    CHECK(plan.faults.size() == plan.test.actions.size());
    CHECK(starts_with(plan.name, "test_"));
    CHECK(!plan.summary.empty());
  }

  const std::string yaml = render_suite_yaml(plans);
  CHECK(yaml == render_suite_yaml(plans));
  CHECK(starts_with(yaml, "# apifuzz test suite\n"));
  CHECK(yaml.find("suite:\n  name: \"apifuzz-suite\"\n  created-with: \"apifuzz\"\n"
                  "  base-url-var: \"API_BASE_URL\"\n") != std::string::npos);
  CHECK(yaml.find("timeout-ms: 60000") != std::string::npos);

  // Link-derived values stay symbolic: extraction plus ${var} references.
  CHECK(yaml.find("extract:") != std::string::npos);
  CHECK(yaml.find("from:") != std::string::npos);
  CHECK(yaml.find("${") != std::string::npos);

  std::string error;
  auto doc = parse_yaml(yaml, &error);
  REQUIRE(doc.has_value());
  const JsonValue* suite = doc->walk("suite");
  REQUIRE(suite != nullptr);
  REQUIRE(suite->walk("name") != nullptr);
  CHECK(suite->walk("name")->to_display_string() == "apifuzz-suite");
  const JsonValue* tests = doc->walk("tests");
  REQUIRE(tests != nullptr);
  REQUIRE(tests->is_array());
  CHECK(tests->items().size() == plans.size());
  for (std::size_t i = 0; i < tests->items().size(); ++i) {
    const JsonValue& t = tests->items()[i];
    REQUIRE(t.walk("name") != nullptr);
    CHECK(t.walk("name")->to_display_string() == plans[i].name);
    REQUIRE(t.walk("summary") != nullptr);
    CHECK(t.walk("summary")->to_display_string() == plans[i].summary);
    const JsonValue* steps = t.walk("steps");
    REQUIRE(steps != nullptr);
    REQUIRE(steps->is_array());
    CHECK(steps->items().size() == plans[i].test.actions.size());
    for (const JsonValue& s : steps->items()) {
      CHECK(s.walk("verb") != nullptr);
      CHECK(s.walk("path") != nullptr);
      CHECK(s.walk("timeout-ms") != nullptr);
    }
  }
}

TEST_CASE("emitted suites replay green against an identical service") {
  std::string yaml;
  std::size_t total_steps = 0;
  {
    FixtureHub hub;
    SimClock clock;
    InProcessTransport transport(hub.router(), &clock, Millis(10));
    const ApiModel model = model_from(FixtureHub::links_schema());
    SessionConfig cfg;
    cfg.max_time = Millis(20000);
    cfg.seed = 8;
    auto [archive, stats] = run_session(model, nullptr, derive_targets(model), cfg, transport,
                                        clock);
    const auto plans = make_plans(minimized_entries(archive));
    REQUIRE(!plans.empty());
    for (const auto& plan : plans) total_steps += plan.test.actions.size();
    yaml = render_suite_yaml(plans);
  }

  FixtureHub fresh;
  SimClock clock;
  InProcessTransport transport(fresh.router(), &clock, Millis(10));
  const ReplayReport report = replay_suite(yaml, transport);
  CHECK(report.all_passed);
  CHECK(report.steps_total == total_steps);
  CHECK(report.steps_passed == total_steps);

  const std::string rendered = render_replay_report(report);
  CHECK(starts_with(rendered, "PASS "));
  CHECK(rendered.find("replayed " + std::to_string(report.tests.size()) + " tests") !=
        std::string::npos);
  CHECK(rendered.find(", 0 failed") != std::string::npos);
}

TEST_CASE("replay substitutes variables and flags contract drift") {
  const std::string suite = R"(suite:
  name: "apifuzz-suite"
  created-with: "apifuzz"
  base-url-var: "API_BASE_URL"
tests:
  - name: "test_0_postOnThingsReturns201"
    summary: |-
      Calls:
      1 - (201) POST:/things
    steps:
      - verb: "post"
        path: "/things"
        timeout-ms: 60000
        content-type: "application/json"
        body: "{\"name\":\"x\"}"
        extract:
          - var: "id0"
            from: "id"
        expect:
          status: 201
      - verb: "get"
        path: "/things/{id}"
        timeout-ms: 60000
        path-params:
          "id": "${id0}"
        expect:
          status-family: "2xx"
      - verb: "delete"
        path: "/things/{id}"
        timeout-ms: 60000
        path-params:
          "id": "${id0}"
        expect:
          status-family: "2xx-or-404"
      - verb: "get"
        path: "/broken"
        timeout-ms: 60000
        expect:
          status: 200
          body-checks:
            - path: "/errrors"
              instance-type: "null"
)";

  auto conforming = [](const HttpRequest& req) -> HttpResponse {
    if (req.verb == "post" && req.path == "/things") return {201, "", {}, R"({"id":"t9"})"};
    if (req.verb == "get" && req.path == "/things/t9") return {200, "", {}, R"({"id":"t9"})"};
    if (req.verb == "delete" && req.path == "/things/t9") return {404, "", {}, ""};
    if (req.verb == "get" && req.path == "/broken") return {200, "", {}, R"({"errrors":null})"};
    return {500, "", {}, ""};
  };

  SUBCASE("green run against the recorded contract") {
    InProcessTransport transport(conforming);
    const ReplayReport report = replay_suite(suite, transport);
    REQUIRE(report.tests.size() == 1);
    CHECK(report.all_passed);
    CHECK(report.steps_total == 4);
    CHECK(report.steps_passed == 4);
    // The extracted id reached the later steps.
    CHECK(report.tests[0].steps[1].path == "/things/t9");
    CHECK(report.tests[0].steps[2].path == "/things/t9");
  }

  SUBCASE("a fixed mismatch field turns the body check red") {
    auto fixed = [&](const HttpRequest& req) -> HttpResponse {
      if (req.verb == "get" && req.path == "/broken")
        return {200, "", {}, R"({"errrors":"all good now"})"};
      return conforming(req);
    };
    InProcessTransport transport(fixed);
    const ReplayReport report = replay_suite(suite, transport);
    CHECK_FALSE(report.all_passed);
    CHECK(report.steps_passed == report.steps_total - 1);
    const auto& step = report.tests[0].steps[3];
    CHECK_FALSE(step.passed);
    CHECK(step.note == "body /errrors: expected instance type null, got string");
    CHECK(render_replay_report(report).find("FAIL test_0_postOnThingsReturns201") !=
          std::string::npos);
  }

  SUBCASE("status drift is reported with both statuses") {
    auto drifted = [&](const HttpRequest& req) -> HttpResponse {
      if (req.verb == "post" && req.path == "/things") return {200, "", {}, R"({"id":"t9"})"};
      return conforming(req);
    };
    InProcessTransport transport(drifted);
    const ReplayReport report = replay_suite(suite, transport);
    CHECK_FALSE(report.all_passed);
    CHECK(report.tests[0].steps[0].note == "expected status 201, got 200");
  }

  SUBCASE("unparseable suites are configuration errors") {
    InProcessTransport transport(conforming);
    CHECK_THROWS_AS(replay_suite("tests: [unclosed", transport), ConfigError);
    CHECK_THROWS_AS(replay_suite("suite:\n  name: \"x\"\n", transport), ConfigError);
  }
}

TEST_CASE("curl export wires extractions through shell variables") {
  const ApiModel model = model_from(test_support::kLinksSchema);
  const EndpointSpec* create = find_endpoint(model, "post", "/api/links/create");
  const EndpointSpec* get_user = find_endpoint(model, "get", "/api/links/users/{name}/{code}");
  REQUIRE(create != nullptr);
  REQUIRE(get_user != nullptr);

  TestPlan plan;
  plan.name = "test_0_getOnUserReturns200";
  plan.summary = "Calls:\n1 - (200) POST:/api/links/create";
  plan.test.actions.push_back(action_on(create));
  HttpAction follow = action_on(get_user);
  follow.set_path_param("name", JsonValue::string("${link_0__data_id}"));
  follow.set_path_param("code", JsonValue::string("${link_0__data_code}"));
  follow.set_query_param("name", JsonValue::string("B R"));
  plan.test.actions.push_back(follow);
  Binding b;
  b.source_action = 0;
  b.extraction = "data/id";
  b.target_action = 1;
  b.slot_kind = SlotKind::PathParam;
  b.slot_name = "name";
  b.var = "link_0__data_id";
  plan.test.bindings.push_back(b);
  Binding b2 = b;
  b2.extraction = "data/code";
  b2.slot_name = "code";
  b2.var = "link_0__data_code";
  plan.test.bindings.push_back(b2);
  plan.exchanges = {exchange(200, R"({"data":{"id":"u1","code":7}})"), exchange(200, "{}")};
  plan.faults.resize(2);

  const std::string script = render_curl_script({plan});
  CHECK(starts_with(script, "#!/usr/bin/env bash\n"));
  CHECK(script.find("set -u") != std::string::npos);
  CHECK(script.find(": \"${API_BASE_URL:=http://localhost:8080}\"") != std::string::npos);
  CHECK(script.find("response_0=$(curl -sS -X POST \"$API_BASE_URL/api/links/create\")") !=
        std::string::npos);
  CHECK(script.find("link_0__data_id=$(printf '%s' \"$response_0\" | python3 -c ") !=
        std::string::npos);
  CHECK(script.find("print(d[\"data\"][\"id\"])") != std::string::npos);
  // Placeholder path segments become shell variable references; literals are
  // percent-encoded.
  CHECK(script.find("\"$API_BASE_URL/api/links/users/${link_0__data_id}/${link_0__data_code}"
                    "?name=B%20R\"") != std::string::npos);
}

TEST_CASE("emit_suite writes files and surfaces unwritable targets") {
  TestPlan plan;
  plan.name = "test_0_getOnPingReturns200";
  plan.summary = "Calls:\n1 - (200) GET:/ping";
  HttpAction get;
  get.verb = "get";
  get.path_template = "/ping";
  plan.test.actions.push_back(get);
  plan.exchanges = {exchange(200, "{}")};
  plan.faults.resize(1);

  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "apifuzz_emit_test";
  fs::remove_all(dir);

  const std::string yaml_path = emit_suite({plan}, dir.string(), EmitFormat::PlanYaml);
  CHECK(fs::path(yaml_path).filename() == "suite.yaml");
  std::ifstream in(yaml_path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(content == render_suite_yaml({plan}));

  const std::string sh_path = emit_suite({plan}, dir.string(), EmitFormat::CurlScript);
  CHECK(fs::path(sh_path).filename() == "suite.sh");
  CHECK(fs::exists(sh_path));
  fs::remove_all(dir);

  CHECK_THROWS_AS(emit_suite({plan}, "/dev/null/nested", EmitFormat::PlanYaml),
                  EnvironmentError);
}
