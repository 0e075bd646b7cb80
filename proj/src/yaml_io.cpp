#include "apifuzz/yaml_io.hpp"

#include <cctype>
#include <cstdlib>

#include <yaml-cpp/yaml.h>

namespace apifuzz {

namespace {

bool looks_like_integer(const std::string& s) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

bool looks_like_float(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  // strtod accepts "nan"/"inf"; keep those as strings.
  return s.find_first_of("0123456789") != std::string::npos;
}

JsonValue scalar_to_json(const YAML::Node& node) {
  const std::string& s = node.Scalar();
  // Tag "!" marks an explicitly quoted scalar: always a string.
  if (node.Tag() == "!") return JsonValue::string(s);
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return JsonValue::null();
  if (s == "true" || s == "True" || s == "TRUE") return JsonValue::boolean(true);
  if (s == "false" || s == "False" || s == "FALSE") return JsonValue::boolean(false);
  if (looks_like_integer(s)) return JsonValue::number(s);
  if (looks_like_float(s)) return JsonValue::number(s);
  return JsonValue::string(s);
}

JsonValue node_to_json(const YAML::Node& node, int depth) {
  if (depth > 128 || !node.IsDefined() || node.IsNull()) return JsonValue::null();
  switch (node.Type()) {
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      std::vector<JsonValue> items;
      items.reserve(node.size());
      for (const auto& item : node) items.push_back(node_to_json(item, depth + 1));
      return JsonValue::array(std::move(items));
    }
    case YAML::NodeType::Map: {
      std::vector<JsonValue::Field> fields;
      for (const auto& kv : node)
        fields.emplace_back(kv.first.Scalar(), node_to_json(kv.second, depth + 1));
      return JsonValue::object(std::move(fields));
    }
    default:
      return JsonValue::null();
  }
}

}  // namespace

std::optional<JsonValue> parse_yaml(const std::string& text, std::string* error) {
  try {
    YAML::Node root = YAML::Load(text);
    return node_to_json(root, 0);
  } catch (const YAML::Exception& e) {
    if (error) *error = e.what();
    return std::nullopt;
  }
}

std::optional<JsonValue> parse_document(const std::string& text, std::string* error) {
  size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  // Brace-led documents are treated as JSON outright; a YAML fallback here
  // would silently accept broken JSON files.
  if (i < text.size() && (text[i] == '{' || text[i] == '['))
    return JsonValue::parse(text, error);
  return parse_yaml(text, error);
}

}  // namespace apifuzz
