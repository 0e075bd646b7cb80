#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace apifuzz {

/// Tri-state JSON value tree. Distinguishes an absent field (Undefined) from
/// an explicit null. Serializing an object omits Undefined-valued fields and
/// writes Null fields as `null`, so `{x: Undefined}` dumps to `{}` while
/// `{x: Null}` dumps to `{"x":null}`.
///
/// Numbers are kept as decimal text to avoid float drift in emitted plans.
/// Object fields keep insertion order.
class JsonValue {
 public:
  enum class Kind { Undefined, Null, Bool, Number, String, Array, Object };

  using Field = std::pair<std::string, JsonValue>;

  JsonValue() = default;

  static JsonValue undefined() { return JsonValue(); }
  static JsonValue null();
  static JsonValue boolean(bool b);
  static JsonValue number(std::string decimal_text);
  static JsonValue number(long long n);
  static JsonValue number(int n) { return number(static_cast<long long>(n)); }
  static JsonValue number(double d);
  static JsonValue string(std::string s);
  static JsonValue array(std::vector<JsonValue> items = {});
  static JsonValue object(std::vector<Field> fields = {});

  Kind kind() const { return kind_; }
  bool is_undefined() const { return kind_ == Kind::Undefined; }
  bool is_null() const { return kind_ == Kind::Null; }
  bool is_bool() const { return kind_ == Kind::Bool; }
  bool is_number() const { return kind_ == Kind::Number; }
  bool is_string() const { return kind_ == Kind::String; }
  bool is_array() const { return kind_ == Kind::Array; }
  bool is_object() const { return kind_ == Kind::Object; }
  bool is_scalar() const {
    return kind_ == Kind::Null || kind_ == Kind::Bool || kind_ == Kind::Number ||
           kind_ == Kind::String;
  }

  bool as_bool() const { return bool_; }
  /// Decimal text of a Number, exactly as stored.
  const std::string& number_text() const { return text_; }
  double as_double() const;
  /// Integer value if the number text is integral and fits in int64.
  std::optional<long long> as_int() const;
  const std::string& as_string() const { return text_; }

  const std::vector<JsonValue>& items() const { return items_; }
  std::vector<JsonValue>& items() { return items_; }

  const std::vector<Field>& fields() const { return fields_; }
  std::vector<Field>& fields() { return fields_; }

  /// Object lookup; nullptr when the name is absent. An entry whose value is
  /// Undefined is still an entry (it only disappears on serialization).
  const JsonValue* get(std::string_view name) const;
  JsonValue* get(std::string_view name);
  bool has(std::string_view name) const { return get(name) != nullptr; }
  /// Insert or overwrite a field, keeping insertion order for new names.
  void set(std::string_view name, JsonValue v);

  size_t size() const;

  /// Compact JSON text. Undefined fields are omitted; a root Undefined dumps
  /// to the empty string (meaning: no payload at all).
  std::string dump() const;

  /// Structural equality. `{x: Undefined}` differs from `{}`; use
  /// strip_undefined() before comparing parse/serialize round trips.
  bool operator==(const JsonValue& other) const;
  bool operator!=(const JsonValue& other) const { return !(*this == other); }

  /// Copy with every Undefined-valued object field removed, recursively.
  JsonValue strip_undefined() const;

  /// Parse JSON text. Parsed trees never contain Undefined. Returns nullopt
  /// on malformed input (error text in *error when given).
  static std::optional<JsonValue> parse(std::string_view text, std::string* error = nullptr);

  /// Renders a scalar for slot substitution: strings unquoted, numbers as
  /// their decimal text, booleans as true/false, null as "null". Arrays and
  /// objects fall back to compact JSON.
  std::string to_display_string() const;

  /// Walk a slash-separated path ("data/id"); array segments are decimal
  /// indexes. Empty path returns this. nullptr when any segment is missing.
  const JsonValue* walk(std::string_view slash_path) const;

 private:
  Kind kind_ = Kind::Undefined;
  bool bool_ = false;
  std::string text_;  // Number decimal text or String content
  std::vector<JsonValue> items_;
  std::vector<Field> fields_;
};

/// Normalizes extraction-path syntax to slash-separated segments: accepts
/// "$response.body#/data/id", "#/a/b", "/a/b", "a.b" and "a/b".
std::string normalize_pointer(std::string_view raw);

/// Splits a normalized slash path into segments. Empty input -> no segments.
std::vector<std::string> split_pointer(std::string_view slash_path);

void json_escape_to(std::string& out, std::string_view s);

}  // namespace apifuzz
