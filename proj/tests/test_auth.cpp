#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "apifuzz/auth.hpp"
#include "apifuzz/link_resolver.hpp"

using namespace apifuzz;

namespace {

const char* kTomlConfig = R"([[auth]]
name="logintoken"
[auth.loginEndpointAuth]
endpoint="/api/logintoken/login"
payloadRaw= """
{"userId": "foo", "password":"123"}
"""
verb="POST"
contentType="application/json"
[auth.loginEndpointAuth.token]
headerPrefix="Bearer "
extractFromField = "/token/authToken"
httpHeaderName="Authorization"
)";

const char* kYamlConfig = R"(auth:
- name: logintoken
  loginEndpointAuth:
    endpoint: /api/logintoken/login
    payloadRaw: |
      {"userId": "foo", "password":"123"}
    verb: POST
    contentType: application/json
    token:
      headerPrefix: "Bearer "
      extractFromField: /token/authToken
      httpHeaderName: Authorization
)";

/// Minimal login fixture counting real login calls.
struct LoginFixture {
  int logins = 0;
  std::string token = "abc";

  FixtureRouter router() {
    return [this](const HttpRequest& req) -> HttpResponse {
      HttpResponse resp;
      if (req.verb == "post" && req.path == "/api/logintoken/login") {
        logins++;
        resp.status = 200;
        resp.body = R"({"token":{"authToken":")" + token + R"("}})";
      } else {
        resp.status = 404;
      }
      return resp;
    };
  }
};

LoginFlow fig_flow() {
  auto specs = parse_auth_config_text(kTomlConfig, ConfigFormat::Toml);
  REQUIRE(specs.size() == 1);
  REQUIRE(specs[0].login.has_value());
  return *specs[0].login;
}

}  // namespace

TEST_CASE("token-login TOML parses to the expected flow") {
  auto specs = parse_auth_config_text(kTomlConfig, ConfigFormat::Toml);
  REQUIRE(specs.size() == 1);
  const AuthSpec& spec = specs[0];
  CHECK(spec.name == "logintoken");
  CHECK(spec.is_dynamic());
  CHECK(spec.static_headers.empty());

  const LoginFlow& flow = *spec.login;
  CHECK(flow.endpoint == "/api/logintoken/login");
  CHECK(flow.verb == "post");
  CHECK(flow.payload_raw == "{\"userId\": \"foo\", \"password\":\"123\"}\n");
  CHECK(flow.content_type == "application/json");
  CHECK(flow.extract_from == "token/authToken");
  CHECK(flow.header_name == "Authorization");
  CHECK(flow.header_prefix == "Bearer ");
  CHECK_FALSE(flow.lifetime.has_value());
}

TEST_CASE("the same configuration in YAML parses structurally equal") {
  auto toml = parse_auth_config_text(kTomlConfig, ConfigFormat::Toml);
  auto yaml = parse_auth_config_text(kYamlConfig, ConfigFormat::Yaml);
  REQUIRE(toml.size() == 1);
  REQUIRE(yaml.size() == 1);
  CHECK(toml[0].name == yaml[0].name);
  REQUIRE(yaml[0].login.has_value());
  const LoginFlow& a = *toml[0].login;
  const LoginFlow& b = *yaml[0].login;
  CHECK(a.endpoint == b.endpoint);
  CHECK(a.verb == b.verb);
  CHECK(a.payload_raw == b.payload_raw);
  CHECK(a.content_type == b.content_type);
  CHECK(a.extract_from == b.extract_from);
  CHECK(a.header_name == b.header_name);
  CHECK(a.header_prefix == b.header_prefix);
  CHECK(a.lifetime == b.lifetime);
}

TEST_CASE("empty config files yield no auth specs") {
  CHECK(parse_auth_config_text("", ConfigFormat::Toml).empty());
  CHECK(parse_auth_config_text("", ConfigFormat::Yaml).empty());
  CHECK(parse_auth_config_text("# just a comment\n", ConfigFormat::Toml).empty());
}

TEST_CASE("JSON configs are rejected with the explanatory error") {
  CHECK_THROWS_WITH_AS(parse_auth_config_text("{}", ConfigFormat::Json),
                       "JSON not supported for config files", ConfigError);
  CHECK(detect_config_format("auth.json", "") == ConfigFormat::Json);
  CHECK(detect_config_format("auth", "{\"auth\": []}") == ConfigFormat::Json);
}

TEST_CASE("config format detection by extension and content") {
  CHECK(detect_config_format("a.toml", "") == ConfigFormat::Toml);
  CHECK(detect_config_format("a.yaml", "") == ConfigFormat::Yaml);
  CHECK(detect_config_format("a.yml", "") == ConfigFormat::Yaml);
  CHECK(detect_config_format("noext", "[[auth]]\nname=\"x\"\n") == ConfigFormat::Toml);
  CHECK(detect_config_format("noext", "key = \"v\"\n") == ConfigFormat::Toml);
  CHECK(detect_config_format("noext", "auth:\n- name: x\n") == ConfigFormat::Yaml);
  CHECK(detect_config_format("noext", "# comment\nauth:\n") == ConfigFormat::Yaml);
}

TEST_CASE("malformed configs report a parse error with location") {
  try {
    parse_auth_config_text("[[auth]\nname=\"x\"\n", ConfigFormat::Toml);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  try {
    parse_auth_config_text("key \"no equals\"\n", ConfigFormat::Toml);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("parse error") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_auth_config_text("auth: [unclosed\n", ConfigFormat::Yaml), ConfigError);
}

TEST_CASE("invalid auth entries are rejected") {
  CHECK_THROWS_AS(parse_auth_config_text("auth:\n- name: a\n- name: a\n", ConfigFormat::Yaml),
                  ConfigError);
  // Entries need exactly one mechanism.
  CHECK_THROWS_AS(parse_auth_config_text("auth:\n- name: a\n", ConfigFormat::Yaml), ConfigError);
  const char* both = R"(auth:
- name: a
  staticHeaders:
  - {name: X, value: Y}
  loginEndpointAuth:
    endpoint: /login
    token: {extractFromField: /t}
)";
  CHECK_THROWS_AS(parse_auth_config_text(both, ConfigFormat::Yaml), ConfigError);

  const char* query_token = R"(auth:
- name: a
  loginEndpointAuth:
    endpoint: /login
    token:
      extractFromField: /t
      queryParamName: token
)";
  try {
    parse_auth_config_text(query_token, ConfigFormat::Yaml);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("unsupported") != std::string::npos);
  }
}

TEST_CASE("static headers and lifetime parse from YAML") {
  const char* text = R"(auth:
- name: apikey
  staticHeaders:
  - {name: X-Api-Key, value: k1}
  - {name: X-Tenant, value: t9}
- name: shortlived
  loginEndpointAuth:
    endpoint: /login
    lifetime: 5m
    token:
      extractFromField: /token
)";
  auto specs = parse_auth_config_text(text, ConfigFormat::Yaml);
  REQUIRE(specs.size() == 2);
  CHECK_FALSE(specs[0].is_dynamic());
  REQUIRE(specs[0].static_headers.size() == 2);
  CHECK(specs[0].static_headers[0] == std::make_pair(std::string("X-Api-Key"), std::string("k1")));
  REQUIRE(specs[1].login.has_value());
  CHECK(specs[1].login->lifetime == Millis(300000));
  CHECK(specs[1].login->extract_from == "token");
  CHECK(specs[1].login->header_name == "Authorization");  // default
}

TEST_CASE("toml parser covers the config subset") {
  std::string error;
  auto doc = parse_toml("a = 1\nb = \"x\\ty\"\nc = true\nd = [1, 2, 3]\ne = 'lit\\eral'\n"
                        "[t.nested]\nk = -4\n",
                        &error);
  REQUIRE(doc.has_value());
  CHECK(doc->get("a")->as_int() == 1);
  CHECK(doc->get("b")->as_string() == "x\ty");
  CHECK(doc->get("c")->as_bool());
  CHECK(doc->get("d")->items().size() == 3);
  CHECK(doc->get("e")->as_string() == "lit\\eral");
  CHECK(doc->get("t")->get("nested")->get("k")->as_int() == -4);

  CHECK_FALSE(parse_toml("a = 1\na = 2\n", &error).has_value());  // redefinition
  CHECK(error.find("redefined") != std::string::npos);
  CHECK_FALSE(parse_toml("a = bare\n", &error).has_value());
  CHECK_FALSE(parse_toml("a = \"unterminated\n", &error).has_value());
}

TEST_CASE("login call extracts the token and applies the prefix at attachment") {
  LoginFixture fixture;
  SimClock clock;
  InProcessTransport transport(fixture.router(), &clock, Millis(10));

  TokenState token = acquire_token(fig_flow(), transport, clock);
  CHECK(token.value == "abc");
  CHECK_FALSE(token.expires_at.has_value());
  CHECK(fixture.logins == 1);

  // Attachment composes prefix + extracted value into the header.
  std::map<std::string, std::string> vars{{"token_logintoken", token.value}};
  CHECK(substitute_vars("Bearer ${token_logintoken}", vars) == "Bearer abc");
}

TEST_CASE("login failures raise auth errors") {
  SimClock clock;
  LoginFlow flow = fig_flow();

  SUBCASE("missing extraction path names the path") {
    LoginFixture fixture;
    InProcessTransport transport(fixture.router(), &clock);
    flow.extract_from = "missing";
    try {
      acquire_token(flow, transport, clock);
      FAIL("expected AuthError");
    } catch (const AuthError& e) {
      CHECK(std::string(e.what()).find("/missing") != std::string::npos);
    }
  }
  SUBCASE("non-2xx login status") {
    InProcessTransport transport([](const HttpRequest&) {
      HttpResponse r;
      r.status = 403;
      return r;
    });
    CHECK_THROWS_AS(acquire_token(flow, transport, clock), AuthError);
  }
  SUBCASE("transport failure") {
    InProcessTransport transport([](const HttpRequest&) {
      HttpResponse r;
      r.error = "connection refused";
      return r;
    });
    CHECK_THROWS_AS(acquire_token(flow, transport, clock), AuthError);
  }
}

TEST_CASE("five-minute lifetime re-logs in after expiry: exactly two logins") {
  LoginFixture fixture;
  SimClock clock;
  InProcessTransport transport(fixture.router(), &clock, Millis(0));
  TokenCache cache(clock, transport);

  AuthSpec spec;
  spec.name = "logintoken";
  spec.login = fig_flow();
  spec.login->lifetime = Millis(5 * 60 * 1000);

  auto first = cache.login_exchange(spec);
  CHECK(first.status == 200);
  CHECK(fixture.logins == 1);

  // Within the lifetime window: cached, regardless of call count.
  clock.sleep_for(Millis(2 * 60 * 1000));
  for (int i = 0; i < 10; ++i) cache.login_exchange(spec);
  CHECK(fixture.logins == 1);

  // Past the five-minute window (six minutes in): one re-login.
  clock.sleep_for(Millis(4 * 60 * 1000));
  auto later = cache.login_exchange(spec);
  CHECK(later.body.walk("token/authToken")->as_string() == "abc");
  CHECK(fixture.logins == 2);
  CHECK(cache.login_count("logintoken") == 2);
}

TEST_CASE("no lifetime keeps the token for the session until invalidated") {
  LoginFixture fixture;
  SimClock clock;
  InProcessTransport transport(fixture.router(), &clock, Millis(0));
  TokenCache cache(clock, transport);

  AuthSpec spec;
  spec.name = "logintoken";
  spec.login = fig_flow();

  for (int i = 0; i < 5; ++i) cache.login_exchange(spec);
  clock.sleep_for(Millis(60 * 60 * 1000));  // an hour later, still cached
  cache.login_exchange(spec);
  CHECK(fixture.logins == 1);

  cache.invalidate("logintoken");  // the 401 path
  cache.login_exchange(spec);
  CHECK(fixture.logins == 2);
}

TEST_CASE("dynamic auth becomes a login step plus header bindings") {
  AuthSpec spec;
  spec.name = "logintoken";
  spec.login = fig_flow();

  TestCase test;
  HttpAction a1, a2;
  a1.verb = "post";
  a1.path_template = "/api/links/create";
  a2.verb = "get";
  a2.path_template = "/api/links/users/{name}/{code}";
  a2.via_link = "LinkToGetUser";
  a2.via_link_source = 0;
  test.actions = {a1, a2};
  Binding existing;
  existing.id = 0;
  existing.source_action = 0;
  existing.target_action = 1;
  existing.extraction = "data/id";
  existing.slot_kind = SlotKind::PathParam;
  existing.slot_name = "name";
  existing.var = "link_0__data_id";
  test.bindings.push_back(existing);

  apply_auth(test, spec);

  REQUIRE(test.actions.size() == 3);
  const HttpAction& login = test.actions[0];
  CHECK(login.is_login);
  CHECK(login.verb == "post");
  CHECK(login.path_template == "/api/logintoken/login");
  CHECK(login.body_raw == "{\"userId\": \"foo\", \"password\":\"123\"}\n");
  CHECK(login.headers.empty());  // the login itself is unauthenticated

  // Existing structure shifted one step down.
  CHECK(test.bindings[0].source_action == 1);
  CHECK(test.bindings[0].target_action == 2);
  CHECK(test.actions[2].via_link_source == 1);

  // Every authenticated action carries the placeholder header, never a token.
  for (std::size_t i = 1; i < test.actions.size(); ++i) {
    bool found = false;
    for (const auto& [name, value] : test.actions[i].headers)
      if (name == "Authorization") {
        found = true;
        CHECK(value == "Bearer ${token_logintoken}");
      }
    CHECK(found);
  }

  // One token binding per authenticated action, all sharing the variable.
  std::size_t token_bindings = 0;
  for (const auto& b : test.bindings) {
    if (b.var != "token_logintoken") continue;
    token_bindings++;
    CHECK(b.source_action == 0);
    CHECK(b.extraction == "token/authToken");
    CHECK(b.slot_kind == SlotKind::Header);
    CHECK(b.slot_name == "Authorization");
  }
  CHECK(token_bindings == 2);
  CHECK(topologically_sound(test));
}

TEST_CASE("static auth attaches headers verbatim") {
  AuthSpec spec;
  spec.name = "apikey";
  spec.static_headers = {{"X-Api-Key", "k1"}};

  TestCase test;
  HttpAction a;
  a.verb = "get";
  a.path_template = "/x";
  test.actions.push_back(a);
  apply_auth(test, spec);

  REQUIRE(test.actions.size() == 1);
  REQUIRE(test.actions[0].headers.size() == 1);
  CHECK(test.actions[0].headers[0] ==
        std::make_pair(std::string("X-Api-Key"), std::string("k1")));
  CHECK(test.bindings.empty());
}
