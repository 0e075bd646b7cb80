#include "apifuzz/fixtures.hpp"

#include <httplib.h>

#include <thread>

#include "apifuzz/json_value.hpp"
#include "apifuzz/transforms.hpp"

namespace apifuzz {

namespace {

std::vector<std::string> path_segments(const std::string& path) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

HttpResponse json_response(int status, const JsonValue& body) {
  HttpResponse r;
  r.status = status;
  r.body = body.dump();
  r.headers.emplace_back("content-type", "application/json");
  return r;
}

HttpResponse message_response(int status, const std::string& key, const std::string& text) {
  JsonValue body = JsonValue::object();
  body.set(key, JsonValue::string(text));
  return json_response(status, body);
}

HttpResponse yaml_response(const std::string& text) {
  HttpResponse r;
  r.status = 200;
  r.body = text;
  r.headers.emplace_back("content-type", "application/yaml");
  return r;
}

const std::string* header_value(const HttpRequest& req, const std::string& name) {
  for (const auto& [k, v] : req.headers)
    if (to_lower(k) == name) return &v;
  return nullptr;
}

}  // namespace

struct FixtureHub::State {
  FixtureOptions opts;
  RealClock fallback_clock;
  Clock* clock = nullptr;

  mutable std::mutex mutex;

  long long total_requests = 0;
  std::vector<Millis> request_times;

  // links API
  struct LinkEntry {
    std::string id;
    long long code;
  };
  std::vector<LinkEntry> link_entries;
  int link_counter = 0;

  // token-auth API
  std::map<std::string, std::optional<Millis>> tokens;  // token -> expiry
  std::vector<std::string> issued_tokens;
  int successful_logins = 0;
  std::vector<std::string> auth_headers_seen;

  // crud API
  std::map<std::string, std::string> users;     // id -> name
  int user_counter = 0;
  std::map<std::string, std::string> products;  // productId -> name
  int product_counter = 0;

  bool token_valid(const std::string& token) {
    auto it = tokens.find(token);
    if (it == tokens.end()) return false;
    return !it->second || clock->now() < *it->second;
  }
};

FixtureHub::FixtureHub(FixtureOptions opts) : state_(std::make_unique<State>()) {
  state_->opts = opts;
  state_->clock = opts.clock ? opts.clock : &state_->fallback_clock;
  // Pre-existing catalogue: harvested ids that no fuzzing session created
  // and therefore must never delete.
  state_->products["p1"] = "Widget";
  state_->products["p2"] = "Gadget";
  state_->product_counter = 2;
}

FixtureHub::~FixtureHub() = default;

FixtureRouter FixtureHub::router() {
  return [this](const HttpRequest& req) { return handle(req); };
}

HttpResponse FixtureHub::handle(const HttpRequest& req) {
  State& s = *state_;
  std::lock_guard<std::mutex> lock(s.mutex);
  s.total_requests++;
  s.request_times.push_back(s.clock->now());

  const auto seg = path_segments(req.path);
  const std::string& verb = req.verb;

  if (verb == "get" && req.path == "/openapi.yaml") return yaml_response(combined_schema());
  if (verb == "get" && seg.size() == 2 && seg[0] == "schemas") {
    if (seg[1] == "links.yaml") return yaml_response(links_schema());
    if (seg[1] == "auth.yaml") return yaml_response(token_auth_schema());
    if (seg[1] == "secure.yaml") return yaml_response(secure_schema());
    if (seg[1] == "crud.yaml") return yaml_response(crud_schema());
  }

  // ---- links API -------------------------------------------------------
  if (verb == "post" && req.path == "/api/links/create") {
    State::LinkEntry entry{"u" + std::to_string(++s.link_counter), 1000 + s.link_counter};
    s.link_entries.push_back(entry);
    JsonValue data = JsonValue::object();
    data.set("id", JsonValue::string(entry.id));
    data.set("code", JsonValue::number(entry.code));
    JsonValue body = JsonValue::object();
    body.set("data", std::move(data));
    body.set("errrors", JsonValue::string(""));
    return json_response(200, body);
  }
  if (verb == "get" && seg.size() == 5 && seg[0] == "api" && seg[1] == "links" &&
      seg[2] == "users") {
    const std::string& name = seg[3];
    for (const auto& entry : s.link_entries) {
      if (entry.id == name && std::to_string(entry.code) == seg[4]) {
        JsonValue data = JsonValue::object();
        data.set("id", JsonValue::string(entry.id));
        data.set("code", JsonValue::number(entry.code));
        JsonValue body = JsonValue::object();
        body.set("data", std::move(data));
        // Deliberate mismatch: the schema declares errrors as string.
        body.set("errrors", JsonValue::null());
        return json_response(200, body);
      }
    }
    return message_response(404, "message", "user not found");
  }

  // ---- token-auth API --------------------------------------------------
  if (verb == "post" && req.path == "/api/logintoken/login") {
    auto body = JsonValue::parse(req.body);
    const JsonValue* user = body && body->is_object() ? body->get("userId") : nullptr;
    const JsonValue* pass = body && body->is_object() ? body->get("password") : nullptr;
    if (user && pass && user->is_string() && pass->is_string() && user->as_string() == "foo" &&
        pass->as_string() == "123") {
      const std::string token = "fixture-token-" + std::to_string(++s.successful_logins);
      std::optional<Millis> expiry;
      if (s.opts.token_lifetime) expiry = s.clock->now() + *s.opts.token_lifetime;
      s.tokens[token] = expiry;
      s.issued_tokens.push_back(token);
      JsonValue inner = JsonValue::object();
      inner.set("authToken", JsonValue::string(token));
      JsonValue out = JsonValue::object();
      out.set("token", std::move(inner));
      return json_response(200, out);
    }
    return message_response(401, "message", "invalid credentials");
  }
  if (verb == "get" && req.path == "/api/logintoken/check") {
    const std::string* auth = header_value(req, "authorization");
    s.auth_headers_seen.push_back(auth ? *auth : "");
    if (auth && starts_with(*auth, "Bearer ") && s.token_valid(auth->substr(7))) {
      HttpResponse r;
      r.status = 200;
      r.body = "OK";
      r.headers.emplace_back("content-type", "text/plain");
      return r;
    }
    return message_response(401, "message", "missing or expired token");
  }

  // ---- secure API ------------------------------------------------------
  if (verb == "post" && req.path == "/api/secure/submit") {
    auto body = JsonValue::parse(req.body);
    if (!body || !body->is_object()) return message_response(400, "error", "malformed body");
    const JsonValue* sign = body->get("sign");
    if (!sign || !sign->is_string() ||
        sign->as_string() != keyed_digest_over_payload("sign", req.body))
      return message_response(400, "error", "signature mismatch");
    const JsonValue* key = body->get("key");
    if (!key || !key->is_string() || !xor_cipher_unhex(key->as_string()))
      return message_response(400, "error", "key not decryptable");
    const JsonValue* data = body->get("data");
    std::optional<std::string> plain =
        data && data->is_string() ? xor_cipher_unhex(data->as_string()) : std::nullopt;
    auto decrypted = plain ? JsonValue::parse(*plain) : std::nullopt;
    if (!decrypted || !decrypted->is_object())
      return message_response(400, "error", "data not decryptable");
    JsonValue out = JsonValue::object();
    out.set("status", JsonValue::string("accepted"));
    out.set("decrypted", std::move(*decrypted));
    return json_response(200, out);
  }

  // ---- crud API --------------------------------------------------------
  if (seg.size() >= 2 && seg[0] == "api" && seg[1] == "crud") {
    if (verb == "post" && req.path == "/api/crud/users") {
      auto body = JsonValue::parse(req.body);
      const JsonValue* name = body && body->is_object() ? body->get("name") : nullptr;
      if (!name || !name->is_string()) return message_response(400, "error", "name required");
      const JsonValue* id = body->get("id");
      std::string chosen;
      if (id && !id->is_undefined() && !id->is_null()) {
        chosen = id->to_display_string();
        if (s.users.count(chosen)) return message_response(400, "error", "duplicate id");
      } else {
        chosen = "u" + std::to_string(++s.user_counter);
      }
      s.users[chosen] = name->as_string();
      JsonValue out = JsonValue::object();
      out.set("id", JsonValue::string(chosen));
      out.set("name", JsonValue::string(name->as_string()));
      return json_response(201, out);
    }
    if (verb == "get" && req.path == "/api/crud/users") {
      JsonValue arr = JsonValue::array();
      for (const auto& [id, name] : s.users) {
        JsonValue item = JsonValue::object();
        item.set("id", JsonValue::string(id));
        item.set("name", JsonValue::string(name));
        arr.items().push_back(std::move(item));
      }
      return json_response(200, arr);
    }
    if (seg.size() == 4 && seg[2] == "user") {
      auto it = s.users.find(seg[3]);
      if (verb == "get") {
        if (it == s.users.end()) return message_response(404, "message", "no such user");
        JsonValue out = JsonValue::object();
        out.set("id", JsonValue::string(it->first));
        out.set("name", JsonValue::string(it->second));
        return json_response(200, out);
      }
      if (verb == "delete") {
        if (it == s.users.end()) return message_response(404, "message", "no such user");
        s.users.erase(it);
        HttpResponse r;
        r.status = 204;
        return r;
      }
    }
    if (verb == "post" && req.path == "/api/crud/products") {
      auto body = JsonValue::parse(req.body);
      const JsonValue* name = body && body->is_object() ? body->get("name") : nullptr;
      if (!name || !name->is_string()) return message_response(400, "error", "name required");
      const std::string id = "p" + std::to_string(++s.product_counter);
      s.products[id] = name->as_string();
      JsonValue out = JsonValue::object();
      out.set("productId", JsonValue::string(id));
      out.set("name", JsonValue::string(name->as_string()));
      return json_response(201, out);
    }
    if (verb == "get" && req.path == "/api/crud/products") {
      JsonValue arr = JsonValue::array();
      for (const auto& [id, name] : s.products) {
        JsonValue item = JsonValue::object();
        item.set("productId", JsonValue::string(id));
        item.set("name", JsonValue::string(name));
        arr.items().push_back(std::move(item));
      }
      return json_response(200, arr);
    }
    if (seg.size() == 4 && seg[2] == "products") {
      auto it = s.products.find(seg[3]);
      if (verb == "get") {
        if (it == s.products.end()) return message_response(404, "message", "no such product");
        JsonValue out = JsonValue::object();
        out.set("productId", JsonValue::string(it->first));
        out.set("name", JsonValue::string(it->second));
        return json_response(200, out);
      }
      if (verb == "delete") {
        if (it == s.products.end()) return message_response(404, "message", "no such product");
        s.products.erase(it);
        HttpResponse r;
        r.status = 204;
        return r;
      }
    }
  }

  return message_response(404, "message", "no such endpoint");
}

long long FixtureHub::total_requests() const {
  std::lock_guard<std::mutex> lock(state_->mutex);
  return state_->total_requests;
}

std::vector<Millis> FixtureHub::request_times() const {
  std::lock_guard<std::mutex> lock(state_->mutex);
  return state_->request_times;
}

int FixtureHub::successful_logins() const {
  std::lock_guard<std::mutex> lock(state_->mutex);
  return state_->successful_logins;
}

std::vector<std::string> FixtureHub::issued_tokens() const {
  std::lock_guard<std::mutex> lock(state_->mutex);
  return state_->issued_tokens;
}

std::vector<std::string> FixtureHub::authorization_headers_seen() const {
  std::lock_guard<std::mutex> lock(state_->mutex);
  return state_->auth_headers_seen;
}

bool FixtureHub::user_exists(const std::string& id) const {
  std::lock_guard<std::mutex> lock(state_->mutex);
  return state_->users.count(id) != 0;
}

bool FixtureHub::product_exists(const std::string& id) const {
  std::lock_guard<std::mutex> lock(state_->mutex);
  return state_->products.count(id) != 0;
}

std::vector<std::string> FixtureHub::user_ids() const {
  std::lock_guard<std::mutex> lock(state_->mutex);
  std::vector<std::string> out;
  for (const auto& [id, name] : state_->users) out.push_back(id);
  return out;
}

std::string FixtureHub::links_schema() {
  return R"(openapi: 3.0.0
info: {title: links-fixture}
paths:
  "/api/links/create":
    post:
      tags:
      - bb-links-application
      operationId: postCreate
      responses:
        '200':
          description: OK
          content:
            "*/*":
              schema:
                "$ref": "#/components/schemas/BBLinksDto"
          links:
            LinkToGetUser:
              operationId: getUser
              parameters:
                path.name: "$response.body#/data/id"
                query.name: BAR
                code: "$response.body#/data/code"
  "/api/links/users/{name}/{code}":
    get:
      tags:
      - bb-links-application
      operationId: getUser
      parameters:
      - name: name
        in: path
        required: true
        schema:
          type: string
      - name: name
        in: query
        required: false
        schema:
          type: string
      - name: code
        in: path
        required: true
        schema:
          type: integer
          format: int32
      responses:
        '200':
          description: OK
          content:
            "*/*":
              schema:
                "$ref": "#/components/schemas/BBLinksDto"
components:
  schemas:
    BBLinksDto:
      type: object
      properties:
        data:
          type: object
          properties:
            id: {type: string}
            code: {type: integer}
        errrors: {type: string}
)";
}

std::string FixtureHub::token_auth_schema() {
  return R"(openapi: 3.0.0
info: {title: token-auth-fixture}
paths:
  "/api/logintoken/login":
    post:
      tags:
      - token-auth
      operationId: login
      requestBody:
        content:
          application/json:
            schema:
              type: object
              properties:
                userId: {type: string}
                password: {type: string}
              required: [userId, password]
      responses:
        '200':
          description: OK
          content:
            application/json:
              schema:
                type: object
                properties:
                  token:
                    type: object
                    properties:
                      authToken: {type: string}
  "/api/logintoken/check":
    get:
      tags:
      - token-auth
      operationId: check
      responses:
        '200':
          description: OK
          content:
            text/plain:
              schema:
                type: string
)";
}

std::string FixtureHub::secure_schema() {
  return R"(openapi: 3.0.0
info: {title: secure-fixture}
paths:
  "/api/secure/submit":
    post:
      tags:
      - secure
      operationId: submitSecure
      requestBody:
        content:
          application/json:
            schema:
              type: object
              properties:
                key: {type: string}
                data:
                  type: object
                  properties:
                    cardNo: {type: string}
                    owner: {type: string}
                  required: [cardNo, owner]
                sign: {type: string}
              required: [key, data, sign]
      responses:
        '200':
          description: accepted
          content:
            application/json:
              schema:
                type: object
                properties:
                  status: {type: string}
                  decrypted: {type: object}
                required: [status]
        '400':
          description: rejected
          content:
            application/json:
              schema:
                type: object
                properties:
                  error: {type: string}
)";
}

std::string FixtureHub::crud_schema() {
  return R"(openapi: 3.0.0
info: {title: crud-fixture}
paths:
  "/api/crud/users":
    post:
      tags:
      - crud
      operationId: createUser
      requestBody:
        content:
          application/json:
            schema:
              type: object
              properties:
                id: {type: string}
                name: {type: string}
              required: [name]
      responses:
        '201':
          description: created
          content:
            application/json:
              schema:
                type: object
                properties:
                  id: {type: string}
                  name: {type: string}
                required: [id, name]
        '400':
          description: rejected
    get:
      tags:
      - crud
      operationId: listUsers
      responses:
        '200':
          description: OK
          content:
            application/json:
              schema:
                type: array
                items:
                  type: object
                  properties:
                    id: {type: string}
                    name: {type: string}
                  required: [id, name]
  "/api/crud/user/{id}":
    get:
      tags:
      - crud
      operationId: getUserById
      parameters:
      - name: id
        in: path
        required: true
        schema:
          type: string
      responses:
        '200':
          description: OK
          content:
            application/json:
              schema:
                type: object
                properties:
                  id: {type: string}
                  name: {type: string}
                required: [id, name]
        '404':
          description: missing
    delete:
      tags:
      - crud
      operationId: deleteUser
      parameters:
      - name: id
        in: path
        required: true
        schema:
          type: string
      responses:
        '204':
          description: deleted
        '404':
          description: missing
  "/api/crud/products":
    post:
      tags:
      - crud
      operationId: createProduct
      requestBody:
        content:
          application/json:
            schema:
              type: object
              properties:
                name: {type: string}
              required: [name]
      responses:
        '201':
          description: created
          content:
            application/json:
              schema:
                type: object
                properties:
                  productId: {type: string}
                  name: {type: string}
                required: [productId, name]
        '400':
          description: rejected
    get:
      tags:
      - crud
      operationId: listProducts
      responses:
        '200':
          description: OK
          content:
            application/json:
              schema:
                type: array
                items:
                  type: object
                  properties:
                    productId: {type: string}
                    name: {type: string}
                  required: [productId, name]
  "/api/crud/products/{productId}":
    get:
      tags:
      - crud
      operationId: getProductById
      parameters:
      - name: productId
        in: path
        required: true
        schema:
          type: string
      responses:
        '200':
          description: OK
          content:
            application/json:
              schema:
                type: object
                properties:
                  productId: {type: string}
                  name: {type: string}
                required: [productId, name]
        '404':
          description: missing
    delete:
      tags:
      - crud
      operationId: deleteProduct
      parameters:
      - name: productId
        in: path
        required: true
        schema:
          type: string
      responses:
        '204':
          description: deleted
        '404':
          description: missing
)";
}

std::string FixtureHub::combined_schema() {
  // One document with every fixture path. Each per-API document is also
  // served standalone; the union exists so a single fuzz run can cover all.
  auto body_of = [](const std::string& doc) {
    // Strip the "openapi:"/"info:" preamble and a trailing components block
    // is kept only for the links API (the only one using $ref).
    std::size_t paths = doc.find("paths:\n");
    return doc.substr(paths + 7);
  };
  std::string links = links_schema();
  std::size_t components = links.find("components:\n");
  std::string links_paths = body_of(links.substr(0, components));
  std::string components_block = links.substr(components);
  return "openapi: 3.0.0\ninfo: {title: fixture-hub}\npaths:\n" + links_paths +
         body_of(token_auth_schema()) + body_of(secure_schema()) + body_of(crud_schema()) +
         components_block;
}

// ---------------------------------------------------------------------------

struct FixtureServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = 0;
};

FixtureServer::FixtureServer(FixtureHub& hub, int port) : impl_(std::make_unique<Impl>()) {
  auto bridge = [&hub](const httplib::Request& hreq, httplib::Response& hres) {
    HttpRequest req;
    req.verb = to_lower(hreq.method);
    req.path = hreq.path;
    for (const auto& [k, v] : hreq.params) req.query.emplace_back(k, v);
    for (const auto& [k, v] : hreq.headers) req.headers.emplace_back(k, v);
    req.body = hreq.body;
    if (const char* ct = "Content-Type"; hreq.has_header(ct))
      req.content_type = hreq.get_header_value(ct);
    HttpResponse res = hub.handle(req);
    hres.status = res.status;
    std::string content_type = "application/json";
    for (const auto& [k, v] : res.headers) {
      if (to_lower(k) == "content-type")
        content_type = v;
      else
        hres.set_header(k, v);
    }
    if (!res.body.empty()) hres.set_content(res.body, content_type);
  };
  const std::string pattern = "/.*";
  impl_->server.Get(pattern, bridge);
  impl_->server.Post(pattern, bridge);
  impl_->server.Put(pattern, bridge);
  impl_->server.Patch(pattern, bridge);
  impl_->server.Delete(pattern, bridge);

  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  } else {
    if (!impl_->server.bind_to_port("127.0.0.1", port))
      throw EnvironmentError("cannot bind fixture server to port " + std::to_string(port));
    impl_->port = port;
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

FixtureServer::~FixtureServer() { stop(); }

int FixtureServer::port() const { return impl_->port; }

std::string FixtureServer::base_url() const {
  return "http://localhost:" + std::to_string(impl_->port);
}

void FixtureServer::stop() {
  if (impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

}  // namespace apifuzz
