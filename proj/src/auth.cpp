#include "apifuzz/auth.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "apifuzz/yaml_io.hpp"

namespace apifuzz {

namespace {

// ---------------------------------------------------------------------------
// TOML subset parser. Produces the same JsonValue tree shape as the YAML
// parser so one interpreter serves both formats.

class TomlParser {
 public:
  explicit TomlParser(const std::string& text) : text_(text) {}

  std::optional<JsonValue> parse(std::string* error) {
    root_ = JsonValue::object();
    while (true) {
      skip_blank();
      if (pos_ >= text_.size()) break;
      bool ok = peek() == '[' ? parse_header() : parse_key_value();
      if (!ok) {
        if (error) *error = "line " + std::to_string(line_) + ": " + error_;
        return std::nullopt;
      }
    }
    return std::move(root_);
  }

 private:
  char peek() const { return text_[pos_]; }
  bool at_end() const { return pos_ >= text_.size(); }

  bool fail(std::string message) {
    error_ = std::move(message);
    return false;
  }

  void advance() {
    if (text_[pos_] == '\n') line_++;
    pos_++;
  }

  /// Whitespace, newlines and comments between top-level constructs.
  void skip_blank() {
    while (!at_end()) {
      char c = peek();
      if (c == '#') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  /// Spaces within a line only.
  void skip_spaces() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) advance();
  }

  bool expect_line_end() {
    skip_spaces();
    if (!at_end() && peek() == '#')
      while (!at_end() && peek() != '\n') advance();
    if (at_end() || peek() == '\n' || peek() == '\r') return true;
    return fail("unexpected trailing characters");
  }

  static bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  bool parse_key_segment(std::string& out) {
    skip_spaces();
    if (at_end()) return fail("expected a key");
    if (peek() == '"' || peek() == '\'') return parse_string(out);
    out.clear();
    while (!at_end() && is_bare_key_char(peek())) {
      out += peek();
      advance();
    }
    if (out.empty()) return fail("expected a key");
    return true;
  }

  bool parse_dotted_key(std::vector<std::string>& segments) {
    segments.clear();
    while (true) {
      std::string seg;
      if (!parse_key_segment(seg)) return false;
      segments.push_back(std::move(seg));
      skip_spaces();
      if (!at_end() && peek() == '.') {
        advance();
        continue;
      }
      return true;
    }
  }

  bool parse_header() {
    advance();  // '['
    bool array_table = !at_end() && peek() == '[';
    if (array_table) advance();

    std::vector<std::string> segments;
    if (!parse_dotted_key(segments)) return false;
    skip_spaces();
    if (at_end() || peek() != ']') return fail("expected ']' in table header");
    advance();
    if (array_table) {
      if (at_end() || peek() != ']') return fail("expected ']]' in table header");
      advance();
    }
    if (!expect_line_end()) return false;

    // Resolve all but the last segment, then open (or extend) the target.
    JsonValue* node = &root_;
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
      node = descend(node, segments[i]);
      if (node == nullptr) return fail("key '" + segments[i] + "' is not a table");
    }
    const std::string& last = segments.back();
    if (array_table) {
      JsonValue* arr = node->get(last);
      if (arr == nullptr) {
        node->set(last, JsonValue::array());
        arr = node->get(last);
      }
      if (!arr->is_array()) return fail("key '" + last + "' is not an array of tables");
      arr->items().push_back(JsonValue::object());
    } else {
      JsonValue* child = node->get(last);
      if (child == nullptr) node->set(last, JsonValue::object());
      else if (!child->is_object() && !child->is_array())
        return fail("key '" + last + "' is not a table");
    }
    cursor_ = segments;
    return true;
  }

  /// Existing-or-created object child; arrays of tables yield their last
  /// element. nullptr when the key holds a scalar.
  JsonValue* descend(JsonValue* node, const std::string& key) {
    JsonValue* child = node->get(key);
    if (child == nullptr) {
      node->set(key, JsonValue::object());
      child = node->get(key);
    }
    if (child->is_array()) {
      if (child->items().empty()) return nullptr;
      child = &child->items().back();
    }
    return child->is_object() ? child : nullptr;
  }

  /// Cursor is stored as a path, never as a pointer: growing the tree
  /// reallocates field vectors, so raw pointers would dangle.
  JsonValue* resolve_cursor() {
    JsonValue* node = &root_;
    for (const std::string& seg : cursor_) {
      node = node->get(seg);
      if (node == nullptr) return nullptr;
      if (node->is_array()) {
        if (node->items().empty()) return nullptr;
        node = &node->items().back();
      }
    }
    return node;
  }

  bool parse_key_value() {
    std::vector<std::string> segments;
    if (!parse_dotted_key(segments)) return false;
    skip_spaces();
    if (at_end() || peek() != '=') return fail("expected '=' after key");
    advance();
    JsonValue value;
    if (!parse_value(value)) return false;
    if (!expect_line_end()) return false;

    JsonValue* node = resolve_cursor();
    if (node == nullptr) return fail("internal cursor resolution failure");
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
      node = descend(node, segments[i]);
      if (node == nullptr) return fail("key '" + segments[i] + "' is not a table");
    }
    if (node->has(segments.back())) return fail("key '" + segments.back() + "' redefined");
    node->set(segments.back(), std::move(value));
    return true;
  }

  bool parse_value(JsonValue& out) {
    skip_spaces();
    if (at_end()) return fail("expected a value");
    char c = peek();
    if (c == '"' || c == '\'') {
      std::string s;
      if (!parse_string(s)) return false;
      out = JsonValue::string(std::move(s));
      return true;
    }
    if (c == '[') return parse_inline_array(out);
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.')
      return parse_number(out);
    std::string word;
    while (!at_end() && is_bare_key_char(peek())) {
      word += peek();
      advance();
    }
    if (word == "true") {
      out = JsonValue::boolean(true);
      return true;
    }
    if (word == "false") {
      out = JsonValue::boolean(false);
      return true;
    }
    return fail("expected a value (strings must be quoted)");
  }

  bool parse_inline_array(JsonValue& out) {
    advance();  // '['
    std::vector<JsonValue> items;
    while (true) {
      skip_blank();
      if (at_end()) return fail("unterminated array");
      if (peek() == ']') {
        advance();
        break;
      }
      JsonValue item;
      if (!parse_value(item)) return false;
      items.push_back(std::move(item));
      skip_blank();
      if (!at_end() && peek() == ',') advance();
    }
    out = JsonValue::array(std::move(items));
    return true;
  }

  bool parse_number(JsonValue& out) {
    std::string digits;
    while (!at_end()) {
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.' ||
          c == 'e' || c == 'E') {
        digits += c;
        advance();
      } else if (c == '_') {
        advance();  // TOML digit separator
      } else {
        break;
      }
    }
    std::string probe = "{\"n\":" + (digits[0] == '+' ? digits.substr(1) : digits) + "}";
    if (!JsonValue::parse(probe)) return fail("malformed number '" + digits + "'");
    out = JsonValue::number(digits[0] == '+' ? digits.substr(1) : digits);
    return true;
  }

  bool parse_string(std::string& out) {
    out.clear();
    char quote = peek();
    bool multi = text_.compare(pos_, 3, std::string(3, quote)) == 0;
    if (multi) {
      advance();
      advance();
      advance();
      // A newline immediately after the opening delimiter is trimmed.
      if (!at_end() && peek() == '\r') advance();
      if (!at_end() && peek() == '\n') advance();
    } else {
      advance();
    }
    const std::string close = multi ? std::string(3, quote) : std::string(1, quote);
    while (true) {
      if (at_end()) return fail("unterminated string");
      if (text_.compare(pos_, close.size(), close) == 0) {
        for (std::size_t i = 0; i < close.size(); ++i) advance();
        return true;
      }
      char c = peek();
      if (!multi && c == '\n') return fail("unterminated string");
      if (quote == '"' && c == '\\') {
        advance();
        if (at_end()) return fail("dangling escape");
        char e = peek();
        advance();
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case 'b': out += '\b'; break;
          case 'f': out += '\f'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: return fail(std::string("unsupported escape '\\") + e + "'");
        }
        continue;
      }
      out += c;
      advance();
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::string error_;
  JsonValue root_;
  std::vector<std::string> cursor_;
};

// ---------------------------------------------------------------------------
// Config interpretation, shared between YAML and TOML trees.

std::string scalar_text(const JsonValue& v) {
  return v.is_string() ? v.as_string() : v.to_display_string();
}

const JsonValue* required_field(const JsonValue& obj, const std::string& key,
                                const std::string& where) {
  const JsonValue* v = obj.get(key);
  if (v == nullptr || v->is_null())
    throw ConfigError("auth config: missing '" + key + "' in " + where);
  return v;
}

LoginFlow parse_login_flow(const JsonValue& node, const std::string& where) {
  if (!node.is_object()) throw ConfigError("auth config: " + where + " must be a table");
  LoginFlow flow;
  flow.endpoint = scalar_text(*required_field(node, "endpoint", where));
  if (const JsonValue* v = node.get("verb")) flow.verb = to_lower(scalar_text(*v));
  if (const JsonValue* v = node.get("payloadRaw")) flow.payload_raw = scalar_text(*v);
  if (const JsonValue* v = node.get("contentType")) flow.content_type = scalar_text(*v);
  if (const JsonValue* v = node.get("lifetime"); v != nullptr && !v->is_null())
    flow.lifetime = parse_duration(scalar_text(*v));

  const JsonValue* token = required_field(node, "token", where);
  if (!token->is_object()) throw ConfigError("auth config: " + where + ".token must be a table");
  if (token->has("queryParamName") || token->has("pathParamName"))
    throw ConfigError("auth config: sending tokens in a query or path parameter is unsupported; "
                      "only header attachment is implemented");
  flow.extract_from =
      normalize_pointer(scalar_text(*required_field(*token, "extractFromField", where + ".token")));
  if (flow.extract_from.empty())
    throw ConfigError("auth config: extractFromField must be a non-empty field path in " + where);
  if (const JsonValue* v = token->get("httpHeaderName")) flow.header_name = scalar_text(*v);
  if (const JsonValue* v = token->get("headerPrefix")) flow.header_prefix = scalar_text(*v);
  return flow;
}

std::vector<AuthSpec> interpret_config(const JsonValue& doc) {
  std::vector<AuthSpec> specs;
  if (!doc.is_object()) return specs;  // empty file parses to null/empty
  const JsonValue* auth = doc.get("auth");
  if (auth == nullptr || auth->is_null()) return specs;
  if (!auth->is_array()) throw ConfigError("auth config: 'auth' must be a list");

  std::set<std::string> names;
  for (const JsonValue& entry : auth->items()) {
    if (!entry.is_object()) throw ConfigError("auth config: every auth entry must be a table");
    AuthSpec spec;
    spec.name = scalar_text(*required_field(entry, "name", "auth entry"));
    if (!names.insert(spec.name).second)
      throw ConfigError("auth config: duplicate auth name '" + spec.name + "'");

    const JsonValue* headers = entry.get("staticHeaders");
    const JsonValue* login = entry.get("loginEndpointAuth");
    if (headers != nullptr && login != nullptr)
      throw ConfigError("auth config: '" + spec.name +
                        "' declares both staticHeaders and loginEndpointAuth");
    if (headers == nullptr && login == nullptr)
      throw ConfigError("auth config: '" + spec.name +
                        "' declares neither staticHeaders nor loginEndpointAuth");

    if (headers != nullptr) {
      if (!headers->is_array())
        throw ConfigError("auth config: staticHeaders must be a list of name/value tables");
      for (const JsonValue& h : headers->items()) {
        if (!h.is_object())
          throw ConfigError("auth config: staticHeaders must be a list of name/value tables");
        spec.static_headers.emplace_back(
            scalar_text(*required_field(h, "name", "staticHeaders")),
            scalar_text(*required_field(h, "value", "staticHeaders")));
      }
    } else {
      spec.login = parse_login_flow(*login, "loginEndpointAuth");
    }
    specs.push_back(std::move(spec));
  }
  return specs;
}

}  // namespace

std::optional<JsonValue> parse_toml(const std::string& text, std::string* error) {
  return TomlParser(text).parse(error);
}

ConfigFormat detect_config_format(const std::string& path, const std::string& text) {
  std::string lower = to_lower(path);
  if (ends_with(lower, ".json")) return ConfigFormat::Json;
  if (ends_with(lower, ".toml")) return ConfigFormat::Toml;
  if (ends_with(lower, ".yaml") || ends_with(lower, ".yml")) return ConfigFormat::Yaml;

  for (const std::string& raw : split(text, '\n')) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line[0] == '{') return ConfigFormat::Json;
    if (line[0] == '[') return ConfigFormat::Toml;
    std::size_t eq = line.find('=');
    std::size_t colon = line.find(':');
    if (eq != std::string::npos && (colon == std::string::npos || eq < colon))
      return ConfigFormat::Toml;
    return ConfigFormat::Yaml;
  }
  return ConfigFormat::Yaml;
}

std::vector<AuthSpec> parse_auth_config_text(const std::string& text, ConfigFormat format) {
  if (format == ConfigFormat::Json)
    throw ConfigError("JSON not supported for config files");
  std::string error;
  std::optional<JsonValue> doc;
  if (format == ConfigFormat::Toml) {
    doc = parse_toml(text, &error);
  } else {
    if (trim(text).empty()) return {};
    doc = parse_yaml(text, &error);
  }
  if (!doc) throw ConfigError("auth config parse error: " + error);
  return interpret_config(*doc);
}

std::vector<AuthSpec> parse_auth_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("auth config unreadable: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_auth_config_text(buffer.str(), detect_config_format(path, buffer.str()));
}

// ---------------------------------------------------------------------------
// Login execution and caching.

LoginOutcome perform_login(const LoginFlow& flow, HttpTransport& transport, Clock& clock) {
  HttpRequest req;
  req.verb = flow.verb;
  req.path = flow.endpoint;
  req.body = flow.payload_raw;  // byte-for-byte, never re-serialized
  req.content_type = flow.content_type;

  Millis started = clock.now();
  HttpResponse resp = transport.send(req);

  RecordedExchange ex;
  ex.status = resp.status;
  ex.error = resp.error;
  ex.raw_body = resp.body;
  ex.concrete_path = flow.endpoint;
  ex.duration = clock.now() - started;

  if (resp.status == 0) throw AuthError("login transport failure: " + resp.error);
  if (resp.status < 200 || resp.status > 299)
    throw AuthError("login failed with status " + std::to_string(resp.status));
  auto body = JsonValue::parse(resp.body);
  if (!body) throw AuthError("login response body is not JSON");
  ex.body = *body;

  const JsonValue* token = body->walk(flow.extract_from);
  if (token == nullptr || !token->is_scalar() || token->is_null())
    throw AuthError("token extraction path /" + flow.extract_from +
                    " not found in login response");

  TokenState state;
  state.value = token->to_display_string();
  state.obtained_at = started;
  if (flow.lifetime) state.expires_at = started + *flow.lifetime;
  return {std::move(state), std::move(ex)};
}

TokenState acquire_token(const LoginFlow& flow, HttpTransport& transport, Clock& clock) {
  return perform_login(flow, transport, clock).token;
}

RecordedExchange TokenCache::login_exchange(const AuthSpec& spec) {
  if (!spec.login) throw AuthError("auth spec '" + spec.name + "' has no login flow");
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(spec.name);
  if (it != entries_.end()) {
    const TokenState& token = it->second.token;
    if (!token.expires_at || clock_.now() < *token.expires_at) return it->second.exchange;
  }
  LoginOutcome outcome = perform_login(*spec.login, transport_, clock_);
  counts_[spec.name]++;
  entries_[spec.name] = {std::move(outcome.token), outcome.exchange};
  return outcome.exchange;
}

bool TokenCache::has_valid(const AuthSpec& spec) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(spec.name);
  if (it == entries_.end()) return false;
  const TokenState& token = it->second.token;
  return !token.expires_at || clock_.now() < *token.expires_at;
}

void TokenCache::invalidate(const std::string& spec_name) {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_.erase(spec_name);
}

int TokenCache::login_count(const std::string& spec_name) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = counts_.find(spec_name);
  return it == counts_.end() ? 0 : it->second;
}

const TokenState* TokenCache::current(const std::string& spec_name) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(spec_name);
  return it == entries_.end() ? nullptr : &it->second.token;
}

// ---------------------------------------------------------------------------
// Plan-level application.

std::string token_var_name(const AuthSpec& spec) { return "token_" + spec.name; }

void apply_auth(TestCase& test, const AuthSpec& spec) {
  if (!spec.is_dynamic()) {
    for (auto& action : test.actions)
      for (const auto& [name, value] : spec.static_headers) action.set_header(name, value);
    return;
  }

  const LoginFlow& flow = *spec.login;
  HttpAction login;
  login.verb = flow.verb;
  login.path_template = flow.endpoint;
  login.body_raw = flow.payload_raw;
  login.content_type = flow.content_type;
  login.is_login = true;
  login.expect = {Expectation::Kind::Family, 2};

  for (auto& b : test.bindings) {
    b.source_action++;
    b.target_action++;
  }
  for (auto& action : test.actions)
    if (!action.via_link.empty()) action.via_link_source++;
  test.actions.insert(test.actions.begin(), std::move(login));

  const std::string var = token_var_name(spec);
  int id = test.fresh_binding_id();
  for (std::size_t i = 1; i < test.actions.size(); ++i) {
    HttpAction& action = test.actions[i];
    action.set_header(flow.header_name, flow.header_prefix + "${" + var + "}");
    Binding b;
    b.id = id++;
    b.source_action = 0;
    b.extraction = flow.extract_from;
    b.target_action = i;
    b.slot_kind = SlotKind::Header;
    b.slot_name = flow.header_name;
    b.var = var;
    test.bindings.push_back(std::move(b));
  }
}

}  // namespace apifuzz
