#include "apifuzz/transforms.hpp"

#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/params.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "apifuzz/util.hpp"
#include "apifuzz/yaml_io.hpp"

namespace apifuzz {

namespace {

// Demo key material. Good enough for the bundled fixtures; anything real is
// registered by the user with their own keys.
constexpr const char* kDigestKey = "apifuzz-demo-hmac-key";
constexpr const char* kCipherKey = "apifuzz-demo-xor-key";

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

JsonValue parse_or_empty(const std::string& payload_json) {
  auto parsed = JsonValue::parse(payload_json);
  return parsed ? *parsed : JsonValue::object();
}

std::string field_display(const std::string& payload_json, const std::string& name) {
  JsonValue payload = parse_or_empty(payload_json);
  const JsonValue* field = payload.is_object() ? payload.get(name) : nullptr;
  return field ? field->to_display_string() : std::string();
}

}  // namespace

std::string hmac_sha256_hex(const std::string& key, const std::string& message) {
  EVP_MAC* mac = EVP_MAC_fetch(nullptr, "HMAC", nullptr);
  EVP_MAC_CTX* ctx = mac ? EVP_MAC_CTX_new(mac) : nullptr;
  char digest_name[] = "SHA256";
  OSSL_PARAM params[] = {OSSL_PARAM_construct_utf8_string(OSSL_MAC_PARAM_DIGEST, digest_name, 0),
                         OSSL_PARAM_construct_end()};
  unsigned char digest[EVP_MAX_MD_SIZE];
  std::size_t len = 0;
  bool ok = ctx &&
            EVP_MAC_init(ctx, reinterpret_cast<const unsigned char*>(key.data()), key.size(),
                         params) == 1 &&
            EVP_MAC_update(ctx, reinterpret_cast<const unsigned char*>(message.data()),
                           message.size()) == 1 &&
            EVP_MAC_final(ctx, digest, &len, sizeof digest) == 1;
  EVP_MAC_CTX_free(ctx);
  EVP_MAC_free(mac);
  if (!ok) return "";  // provider misconfiguration; never happens with stock OpenSSL
  std::string out;
  out.reserve(len * 2);
  for (std::size_t i = 0; i < len; ++i) {
    out.push_back(kHexDigits[digest[i] >> 4]);
    out.push_back(kHexDigits[digest[i] & 0xf]);
  }
  return out;
}

std::string base64_encode(const std::string& data) {
  if (data.empty()) return "";
  std::string out((data.size() / 3 + 1) * 4 + 1, '\0');
  int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(data.data()),
                                static_cast<int>(data.size()));
  out.resize(written > 0 ? static_cast<std::size_t>(written) : 0);
  return out;
}

std::string xor_cipher_hex(const std::string& plain) {
  const std::string key = kCipherKey;
  std::string out;
  out.reserve(plain.size() * 2);
  for (std::size_t i = 0; i < plain.size(); ++i) {
    unsigned char b = static_cast<unsigned char>(plain[i]) ^
                      static_cast<unsigned char>(key[i % key.size()]);
    out.push_back(kHexDigits[b >> 4]);
    out.push_back(kHexDigits[b & 0xf]);
  }
  return out;
}

std::optional<std::string> xor_cipher_unhex(const std::string& hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  const std::string key = kCipherKey;
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    int hi = hex_nibble(hex[i]), lo = hex_nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    unsigned char b = static_cast<unsigned char>(hi << 4 | lo);
    out.push_back(static_cast<char>(b ^ static_cast<unsigned char>(key[(i / 2) % key.size()])));
  }
  return out;
}

std::string keyed_digest_over_payload(const std::string& param_name,
                                      const std::string& payload_json) {
  JsonValue payload = parse_or_empty(payload_json);
  if (payload.is_object()) {
    auto& fields = payload.fields();
    fields.erase(std::remove_if(fields.begin(), fields.end(),
                                [&](const JsonValue::Field& f) { return f.first == param_name; }),
                 fields.end());
  }
  return hmac_sha256_hex(kDigestKey, payload.dump());
}

TransformRegistry TransformRegistry::with_builtins() {
  TransformRegistry reg;
  reg.add("identity", [](const std::string& name, const std::string& payload,
                         const std::string&) { return field_display(payload, name); });
  reg.add("base64", [](const std::string& name, const std::string& payload, const std::string&) {
    return base64_encode(field_display(payload, name));
  });
  reg.add("xor-cipher", [](const std::string& name, const std::string& payload,
                           const std::string&) { return xor_cipher_hex(field_display(payload, name)); });
  reg.add("keyed-digest", [](const std::string& name, const std::string& payload,
                             const std::string&) { return keyed_digest_over_payload(name, payload); });
  return reg;
}

void TransformRegistry::add(const std::string& name, TransformFn fn) {
  fns_[name] = std::move(fn);
}

const TransformFn* TransformRegistry::find(const std::string& name) const {
  auto it = fns_.find(name);
  return it == fns_.end() ? nullptr : &it->second;
}

std::vector<std::string> TransformRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, fn] : fns_) out.push_back(name);
  return out;
}

void validate_rules(const std::vector<DerivedParamRule>& rules, const TransformRegistry& registry) {
  for (const auto& rule : rules) {
    if (rule.name.empty()) throw ConfigError("derived param rule without a field name");
    if (rule.context != "body-payload")
      throw ConfigError("derived param '" + rule.name + "': unsupported context '" + rule.context +
                        "' (only body-payload)");
    if (rule.order < 0)
      throw ConfigError("derived param '" + rule.name + "': order must be non-negative");
    if (!registry.find(rule.transform))
      throw ConfigError("derived param '" + rule.name + "': unregistered transform '" +
                        rule.transform + "'");
  }
}

JsonValue apply_derived_params(const JsonValue& payload, std::vector<DerivedParamRule> rules,
                               const TransformRegistry& registry,
                               const std::string& endpoint_path) {
  if (!payload.is_object() || rules.empty()) return payload;
  std::stable_sort(rules.begin(), rules.end(),
                   [](const DerivedParamRule& a, const DerivedParamRule& b) { return a.order < b.order; });

  JsonValue out = payload;
  std::size_t i = 0;
  while (i < rules.size()) {
    std::size_t j = i;
    while (j < rules.size() && rules[j].order == rules[i].order) ++j;
    // Every rule in the level sees this snapshot, so equal-order rules never
    // observe each other's outputs.
    const std::string snapshot = out.dump();
    std::vector<std::pair<std::string, std::string>> writes;
    for (std::size_t k = i; k < j; ++k) {
      const DerivedParamRule& rule = rules[k];
      if (rule.endpoints && rule.endpoints->count(endpoint_path) == 0) continue;
      const JsonValue* field = out.get(rule.name);
      if (!field || field->is_undefined()) continue;
      const TransformFn* fn = registry.find(rule.transform);
      if (!fn) throw ConfigError("unregistered transform '" + rule.transform + "'");
      writes.emplace_back(rule.name, (*fn)(rule.name, snapshot, endpoint_path));
    }
    for (auto& [name, value] : writes) out.set(name, JsonValue::string(std::move(value)));
    i = j;
  }
  return out;
}

namespace {

DerivedParamRule interpret_rule(const JsonValue& node, std::size_t index) {
  const std::string where = "derivedParams[" + std::to_string(index) + "]";
  if (!node.is_object()) throw ConfigError(where + ": rule must be a mapping");
  DerivedParamRule rule;
  if (const JsonValue* v = node.get("name"); v && v->is_string()) rule.name = v->as_string();
  if (rule.name.empty()) throw ConfigError(where + ": missing 'name'");
  if (const JsonValue* v = node.get("transform"); v && v->is_string())
    rule.transform = v->as_string();
  if (rule.transform.empty()) throw ConfigError(where + ": missing 'transform'");
  if (const JsonValue* v = node.get("context"); v && !v->is_undefined())
    rule.context = v->to_display_string();
  if (const JsonValue* v = node.get("order"); v && !v->is_undefined()) {
    auto n = v->as_int();
    if (!n) throw ConfigError(where + ": 'order' must be an integer");
    rule.order = static_cast<int>(*n);
  }
  if (const JsonValue* v = node.get("endpoints"); v && !v->is_undefined()) {
    if (!v->is_array()) throw ConfigError(where + ": 'endpoints' must be a list");
    std::set<std::string> eps;
    for (const auto& item : v->items()) eps.insert(item.to_display_string());
    rule.endpoints = std::move(eps);
  }
  return rule;
}

}  // namespace

std::vector<DerivedParamRule> parse_derived_params_text(const std::string& text,
                                                        ConfigFormat format) {
  JsonValue root;
  std::string err;
  switch (format) {
    case ConfigFormat::Json:
      throw ConfigError("JSON not supported for config files");
    case ConfigFormat::Toml: {
      auto parsed = parse_toml(text, &err);
      if (!parsed) throw ConfigError("derived params config parse error: " + err);
      root = std::move(*parsed);
      break;
    }
    case ConfigFormat::Yaml: {
      if (trim(text).empty()) return {};
      auto parsed = parse_yaml(text, &err);
      if (!parsed) throw ConfigError("derived params config parse error: " + err);
      root = std::move(*parsed);
      break;
    }
  }
  if (root.is_undefined() || root.is_null()) return {};
  if (!root.is_object()) throw ConfigError("derived params config: top level must be a mapping");
  const JsonValue* list = root.get("derivedParams");
  if (!list || list->is_undefined()) return {};
  if (!list->is_array()) throw ConfigError("derived params config: 'derivedParams' must be a list");
  std::vector<DerivedParamRule> rules;
  for (std::size_t i = 0; i < list->items().size(); ++i)
    rules.push_back(interpret_rule(list->items()[i], i));
  return rules;
}

std::vector<DerivedParamRule> parse_derived_params_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("derived params config unreadable: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  return parse_derived_params_text(text, detect_config_format(path, text));
}

}  // namespace apifuzz
