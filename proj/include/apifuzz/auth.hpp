#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "apifuzz/http.hpp"
#include "apifuzz/json_value.hpp"
#include "apifuzz/test_case.hpp"
#include "apifuzz/util.hpp"

namespace apifuzz {

/// Dynamic-token login flow: call the endpoint, pull the token out of the
/// response body, send it with every request in the configured header.
struct LoginFlow {
  std::string endpoint;
  std::string verb = "post";     // lowercase
  std::string payload_raw;       // sent byte-for-byte
  std::string content_type = "application/json";
  std::string extract_from;      // normalized slash path, e.g. "token/authToken"
  std::string header_name = "Authorization";
  std::string header_prefix;     // e.g. "Bearer "
  std::optional<Millis> lifetime;
};

/// One named credential: either fixed headers or a login flow.
struct AuthSpec {
  std::string name;
  std::vector<std::pair<std::string, std::string>> static_headers;
  std::optional<LoginFlow> login;

  bool is_dynamic() const { return login.has_value(); }
};

/// Parses a TOML subset sufficient for configuration files: tables, arrays
/// of tables, dotted paths, basic/literal/multi-line strings, integers,
/// floats, booleans and inline scalar arrays. Errors carry line numbers.
std::optional<JsonValue> parse_toml(const std::string& text, std::string* error = nullptr);

enum class ConfigFormat { Yaml, Toml, Json };

/// Format by extension when recognized, content sniffing otherwise.
ConfigFormat detect_config_format(const std::string& path, const std::string& text);

/// Parses an auth configuration file (YAML or TOML; JSON is rejected with
/// "JSON not supported for config files"). Throws ConfigError on unreadable
/// files, parse errors (with location) and invalid entries.
std::vector<AuthSpec> parse_auth_config(const std::string& path);

/// Same, parsing in-memory text under an explicit format.
std::vector<AuthSpec> parse_auth_config_text(const std::string& text, ConfigFormat format);

/// A fetched token. expires_at is obtained_at + lifetime when configured.
struct TokenState {
  std::string value;  // raw token, prefix not applied
  Millis obtained_at{0};
  std::optional<Millis> expires_at;
};

struct LoginOutcome {
  TokenState token;
  RecordedExchange exchange;  // the login call, replayable for extraction
};

/// Performs the login call and extracts the token. Throws AuthError on
/// transport failure, non-2xx status or a missing extraction path (the error
/// names the path).
LoginOutcome perform_login(const LoginFlow& flow, HttpTransport& transport, Clock& clock);
TokenState acquire_token(const LoginFlow& flow, HttpTransport& transport, Clock& clock);

/// Session-wide token cache: at most one real login per lifetime window per
/// spec. Without a lifetime a token lives until invalidated (401 handling).
/// Engine access is sequential; the lock guards snapshot readers.
class TokenCache {
 public:
  TokenCache(Clock& clock, HttpTransport& transport) : clock_(clock), transport_(transport) {}

  /// The exchange to record for a login action: a real HTTP login when no
  /// cached token is valid, a replay of the cached login response otherwise.
  RecordedExchange login_exchange(const AuthSpec& spec);

  /// Whether login_exchange would replay the cache instead of hitting the
  /// network. Lets callers rate-limit only real logins.
  bool has_valid(const AuthSpec& spec) const;

  /// Drops the cached token so the next login_exchange re-authenticates.
  void invalidate(const std::string& spec_name);

  /// Real HTTP logins performed for the spec.
  int login_count(const std::string& spec_name) const;

  const TokenState* current(const std::string& spec_name) const;

 private:
  mutable std::mutex mutex_;
  Clock& clock_;
  HttpTransport& transport_;
  struct Entry {
    TokenState token;
    RecordedExchange exchange;
  };
  std::map<std::string, Entry> entries_;
  std::map<std::string, int> counts_;
};

/// Variable name a login extraction binds to: "token_<spec name>".
std::string token_var_name(const AuthSpec& spec);

/// Applies a credential to a whole test. Static headers attach verbatim to
/// every action. A login flow prepends a login step and binds every other
/// action's auth header to the login-response extraction; the header value
/// is "<prefix>${token_<name>}", never a literal token.
void apply_auth(TestCase& test, const AuthSpec& spec);

}  // namespace apifuzz
