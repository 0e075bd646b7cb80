#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "apifuzz/http.hpp"
#include "apifuzz/util.hpp"

namespace apifuzz {

struct FixtureOptions {
  /// Issued login tokens expire after this long; absent = never.
  std::optional<Millis> token_lifetime;
  /// Time source for token expiry and request timestamps. Defaults to an
  /// internal real clock; tests pass the same SimClock the engine runs on.
  Clock* clock = nullptr;
};

/// The bundled demo APIs behind one handler, usable both through
/// InProcessTransport and mounted on a real localhost server:
///   /api/links/...      chained-operations API with a deliberate
///                       response-vs-schema mismatch on its GET
///   /api/logintoken/... token login plus one authenticated endpoint
///   /api/secure/...     signed/enciphered payload verification
///   /api/crud/...       users (client- or server-chosen ids) and products
/// Each API's OpenAPI document is served at /schemas/<name>.yaml, the union
/// at /openapi.yaml. All state is guarded; counters expose test oracles.
class FixtureHub {
 public:
  explicit FixtureHub(FixtureOptions opts = {});
  ~FixtureHub();

  HttpResponse handle(const HttpRequest& req);
  FixtureRouter router();

  // Oracles.
  long long total_requests() const;
  std::vector<Millis> request_times() const;
  int successful_logins() const;
  std::vector<std::string> issued_tokens() const;
  /// Authorization header of every request to the authenticated endpoint,
  /// empty string when absent.
  std::vector<std::string> authorization_headers_seen() const;
  bool user_exists(const std::string& id) const;
  bool product_exists(const std::string& id) const;
  std::vector<std::string> user_ids() const;

  static std::string links_schema();
  static std::string token_auth_schema();
  static std::string secure_schema();
  static std::string crud_schema();
  static std::string combined_schema();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

/// Mounts a FixtureHub on localhost. port 0 picks a free port.
class FixtureServer {
 public:
  explicit FixtureServer(FixtureHub& hub, int port = 0);
  ~FixtureServer();

  int port() const;
  std::string base_url() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace apifuzz
