#include "apifuzz/json_value.hpp"

#include <cstdio>
#include <cstdlib>

#include <nlohmann/json.hpp>

namespace apifuzz {

JsonValue JsonValue::null() {
  JsonValue v;
  v.kind_ = Kind::Null;
  return v;
}

JsonValue JsonValue::boolean(bool b) {
  JsonValue v;
  v.kind_ = Kind::Bool;
  v.bool_ = b;
  return v;
}

JsonValue JsonValue::number(std::string decimal_text) {
  JsonValue v;
  v.kind_ = Kind::Number;
  v.text_ = std::move(decimal_text);
  return v;
}

JsonValue JsonValue::number(long long n) { return number(std::to_string(n)); }

JsonValue JsonValue::number(double d) {
  // nlohmann emits shortest round-trip text, which keeps output stable.
  return number(nlohmann::json(d).dump());
}

JsonValue JsonValue::string(std::string s) {
  JsonValue v;
  v.kind_ = Kind::String;
  v.text_ = std::move(s);
  return v;
}

JsonValue JsonValue::array(std::vector<JsonValue> items) {
  JsonValue v;
  v.kind_ = Kind::Array;
  v.items_ = std::move(items);
  return v;
}

JsonValue JsonValue::object(std::vector<Field> fields) {
  JsonValue v;
  v.kind_ = Kind::Object;
  v.fields_ = std::move(fields);
  return v;
}

double JsonValue::as_double() const { return std::strtod(text_.c_str(), nullptr); }

std::optional<long long> JsonValue::as_int() const {
  if (kind_ != Kind::Number) return std::nullopt;
  if (text_.find_first_of(".eE") != std::string::npos) return std::nullopt;
  errno = 0;
  char* end = nullptr;
  long long n = std::strtoll(text_.c_str(), &end, 10);
  if (errno != 0 || end == text_.c_str() || *end != '\0') return std::nullopt;
  return n;
}

const JsonValue* JsonValue::get(std::string_view name) const {
  for (const auto& [k, v] : fields_)
    if (k == name) return &v;
  return nullptr;
}

JsonValue* JsonValue::get(std::string_view name) {
  for (auto& [k, v] : fields_)
    if (k == name) return &v;
  return nullptr;
}

void JsonValue::set(std::string_view name, JsonValue v) {
  if (JsonValue* existing = get(name)) {
    *existing = std::move(v);
    return;
  }
  fields_.emplace_back(std::string(name), std::move(v));
}

size_t JsonValue::size() const {
  if (kind_ == Kind::Array) return items_.size();
  if (kind_ == Kind::Object) return fields_.size();
  return 0;
}

void json_escape_to(std::string& out, std::string_view s) {
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
}

namespace {

void dump_to(std::string& out, const JsonValue& v) {
  switch (v.kind()) {
    case JsonValue::Kind::Undefined:
      break;  // callers never reach here for fields; root handled by dump()
    case JsonValue::Kind::Null:
      out += "null";
      break;
    case JsonValue::Kind::Bool:
      out += v.as_bool() ? "true" : "false";
      break;
    case JsonValue::Kind::Number:
      out += v.number_text();
      break;
    case JsonValue::Kind::String:
      out += '"';
      json_escape_to(out, v.as_string());
      out += '"';
      break;
    case JsonValue::Kind::Array: {
      out += '[';
      bool first = true;
      for (const auto& item : v.items()) {
        if (item.is_undefined()) continue;
        if (!first) out += ',';
        first = false;
        dump_to(out, item);
      }
      out += ']';
      break;
    }
    case JsonValue::Kind::Object: {
      out += '{';
      bool first = true;
      for (const auto& [name, value] : v.fields()) {
        if (value.is_undefined()) continue;
        if (!first) out += ',';
        first = false;
        out += '"';
        json_escape_to(out, name);
        out += "\":";
        dump_to(out, value);
      }
      out += '}';
      break;
    }
  }
}

JsonValue from_nlohmann(const nlohmann::ordered_json& j) {
  switch (j.type()) {
    case nlohmann::ordered_json::value_t::null:
      return JsonValue::null();
    case nlohmann::ordered_json::value_t::boolean:
      return JsonValue::boolean(j.get<bool>());
    case nlohmann::ordered_json::value_t::number_integer:
    case nlohmann::ordered_json::value_t::number_unsigned:
    case nlohmann::ordered_json::value_t::number_float:
      return JsonValue::number(j.dump());
    case nlohmann::ordered_json::value_t::string:
      return JsonValue::string(j.get<std::string>());
    case nlohmann::ordered_json::value_t::array: {
      std::vector<JsonValue> items;
      items.reserve(j.size());
      for (const auto& item : j) items.push_back(from_nlohmann(item));
      return JsonValue::array(std::move(items));
    }
    case nlohmann::ordered_json::value_t::object: {
      std::vector<JsonValue::Field> fields;
      fields.reserve(j.size());
      for (auto it = j.begin(); it != j.end(); ++it)
        fields.emplace_back(it.key(), from_nlohmann(it.value()));
      return JsonValue::object(std::move(fields));
    }
    default:
      return JsonValue::null();
  }
}

}  // namespace

std::string JsonValue::dump() const {
  if (is_undefined()) return "";
  std::string out;
  dump_to(out, *this);
  return out;
}

bool JsonValue::operator==(const JsonValue& other) const {
  if (kind_ != other.kind_) return false;
  switch (kind_) {
    case Kind::Undefined:
    case Kind::Null:
      return true;
    case Kind::Bool:
      return bool_ == other.bool_;
    case Kind::Number:
    case Kind::String:
      return text_ == other.text_;
    case Kind::Array:
      return items_ == other.items_;
    case Kind::Object:
      return fields_ == other.fields_;
  }
  return false;
}

JsonValue JsonValue::strip_undefined() const {
  switch (kind_) {
    case Kind::Array: {
      std::vector<JsonValue> items;
      for (const auto& item : items_) {
        if (item.is_undefined()) continue;
        items.push_back(item.strip_undefined());
      }
      return array(std::move(items));
    }
    case Kind::Object: {
      std::vector<Field> fields;
      for (const auto& [name, value] : fields_) {
        if (value.is_undefined()) continue;
        fields.emplace_back(name, value.strip_undefined());
      }
      return object(std::move(fields));
    }
    default:
      return *this;
  }
}

std::optional<JsonValue> JsonValue::parse(std::string_view text, std::string* error) {
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    if (error) *error = "malformed JSON";
    return std::nullopt;
  }
  return from_nlohmann(j);
}

std::string JsonValue::to_display_string() const {
  switch (kind_) {
    case Kind::Undefined:
      return "";
    case Kind::Null:
      return "null";
    case Kind::Bool:
      return bool_ ? "true" : "false";
    case Kind::Number:
    case Kind::String:
      return text_;
    default:
      return dump();
  }
}

const JsonValue* JsonValue::walk(std::string_view slash_path) const {
  const JsonValue* cur = this;
  for (const auto& seg : split_pointer(slash_path)) {
    if (cur->is_object()) {
      cur = cur->get(seg);
      if (!cur) return nullptr;
    } else if (cur->is_array()) {
      char* end = nullptr;
      long idx = std::strtol(seg.c_str(), &end, 10);
      if (end == seg.c_str() || *end != '\0' || idx < 0 ||
          static_cast<size_t>(idx) >= cur->items().size())
        return nullptr;
      cur = &cur->items()[static_cast<size_t>(idx)];
    } else {
      return nullptr;
    }
  }
  return cur;
}

std::string normalize_pointer(std::string_view raw) {
  std::string_view p = raw;
  if (auto hash = p.find('#'); hash != std::string_view::npos &&
                               p.substr(0, hash).find("body") != std::string_view::npos) {
    p = p.substr(hash);  // "$response.body#/data/id" -> "#/data/id"
  }
  if (!p.empty() && p.front() == '#') p.remove_prefix(1);
  while (!p.empty() && p.front() == '/') p.remove_prefix(1);
  std::string out(p);
  if (out.find('/') == std::string::npos) {
    for (char& c : out)
      if (c == '.') c = '/';
  }
  return out;
}

std::vector<std::string> split_pointer(std::string_view slash_path) {
  std::vector<std::string> segments;
  size_t start = 0;
  while (start <= slash_path.size() && !slash_path.empty()) {
    size_t slash = slash_path.find('/', start);
    if (slash == std::string_view::npos) {
      segments.emplace_back(slash_path.substr(start));
      break;
    }
    segments.emplace_back(slash_path.substr(start, slash - start));
    start = slash + 1;
  }
  return segments;
}

}  // namespace apifuzz
