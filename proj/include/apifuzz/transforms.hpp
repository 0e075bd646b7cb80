#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "apifuzz/auth.hpp"
#include "apifuzz/json_value.hpp"

namespace apifuzz {

/// Computes the replacement value for one derived request field. Receives the
/// field name, the whole payload serialized as it stood when the rule's order
/// level started, and the endpoint path. Must be pure given those inputs plus
/// whatever key material was registered with it.
using TransformFn = std::function<std::string(
    const std::string& param_name, const std::string& payload_json, const std::string& endpoint_path)>;

class TransformRegistry {
 public:
  /// Registry preloaded with the bundled demo transforms:
  ///   identity     - the field's current value, rendered as a string
  ///   base64       - base64 of the field's current value
  ///   xor-cipher   - reversible hex-encoded keystream cipher, a stand-in for
  ///                  real RSA/AES envelopes (which stay user-pluggable)
  ///   keyed-digest - HMAC-SHA256 (hex) over the payload with the derived
  ///                  field removed, the usual request-signing shape
  static TransformRegistry with_builtins();

  void add(const std::string& name, TransformFn fn);
  const TransformFn* find(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, TransformFn> fns_;
};

struct DerivedParamRule {
  std::string name;                                // body field to replace
  std::string context = "body-payload";            // only supported context
  std::string transform;                           // registered transform name
  std::optional<std::set<std::string>> endpoints;  // absent = every endpoint with the field
  int order = 0;
};

/// Startup check: every rule must name a registered transform, use a
/// supported context and a non-negative order. Throws ConfigError so a typo
/// surfaces before any request is sent.
void validate_rules(const std::vector<DerivedParamRule>& rules, const TransformRegistry& registry);

/// Applies matching rules in ascending order levels. Rules sharing an order
/// are independent: each sees the payload serialization from the start of its
/// level, never a same-level sibling's output. Later levels observe earlier
/// levels' outputs. Non-object payloads and rules whose field is absent are
/// skipped; replacement values are always JSON strings.
JsonValue apply_derived_params(const JsonValue& payload, std::vector<DerivedParamRule> rules,
                               const TransformRegistry& registry,
                               const std::string& endpoint_path);

/// Rules file, YAML or TOML (same detection and JSON rejection as auth
/// configs): top-level `derivedParams` list; per rule `name`, `transform`,
/// optional `order` (default 0), `context` (default body-payload) and
/// `endpoints` (list of path templates).
std::vector<DerivedParamRule> parse_derived_params_config(const std::string& path);
std::vector<DerivedParamRule> parse_derived_params_text(const std::string& text,
                                                        ConfigFormat format);

// Building blocks of the bundled transforms, shared with the fixture API's
// verification side so both ends agree byte-for-byte.
std::string hmac_sha256_hex(const std::string& key, const std::string& message);
std::string base64_encode(const std::string& data);
std::string xor_cipher_hex(const std::string& plain);
std::optional<std::string> xor_cipher_unhex(const std::string& hex);
/// hmac_sha256_hex over the payload with `param_name` removed, using the
/// bundled demo key.
std::string keyed_digest_over_payload(const std::string& param_name,
                                      const std::string& payload_json);

}  // namespace apifuzz
