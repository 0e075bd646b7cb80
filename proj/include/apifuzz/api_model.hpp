#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "apifuzz/json_value.hpp"
#include "apifuzz/schema_loader.hpp"
#include "apifuzz/warnings.hpp"

namespace apifuzz {

struct SchemaField;

/// Typed value schema with the subset of JSON-Schema keywords the generator
/// and the response checker understand. Composite covers oneOf/anyOf/allOf.
struct ValueSchema {
  enum class Type { String, Integer, Number, Boolean, Array, Object, Composite };
  enum class CompositeKind { OneOf, AnyOf, AllOf };

  Type type = Type::Object;
  std::string format;  // "int32", "date-time", ... informational
  bool nullable = false;

  std::optional<std::string> pattern;
  std::optional<double> minimum;
  std::optional<double> maximum;
  std::optional<long long> min_length;
  std::optional<long long> max_length;
  std::vector<JsonValue> enum_values;

  std::vector<SchemaField> fields;  // object fields, schema order
  std::vector<ValueSchema> item;    // array element schema; empty or one entry
  CompositeKind composite_kind = CompositeKind::OneOf;
  std::vector<ValueSchema> branches;

  std::vector<JsonValue> examples;  // type-conforming examples only

  bool has_item() const { return !item.empty(); }
  const SchemaField* field(std::string_view name) const;
};

struct SchemaField {
  std::string name;
  bool required = false;
  ValueSchema schema;
};

enum class ParamLocation { Path, Query, Header };

std::string to_string(ParamLocation loc);

struct ParamSpec {
  std::string name;
  ParamLocation location = ParamLocation::Query;
  bool required = false;
  ValueSchema schema;
  std::vector<JsonValue> examples;  // type-conforming examples only
};

/// One link parameter binding: either a constant value or an extraction from
/// the source response body (normalized slash-path pointer).
struct LinkBinding {
  enum class Kind { Constant, ResponseExtraction };
  Kind kind = Kind::Constant;
  JsonValue constant;
  std::string pointer;
};

struct LinkSpec {
  std::string name;
  std::string target_operation_id;
  /// Designators keep their schema spelling: "path.name", "query.name" or a
  /// bare parameter name when no disambiguation is needed.
  std::vector<std::pair<std::string, LinkBinding>> bindings;
};

struct ResponseSpec {
  std::string status;  // "200", "4XX" or "default"
  bool has_schema = false;
  ValueSchema schema;
  std::vector<LinkSpec> links;
};

struct BodySpec {
  std::string media_type;
  ValueSchema schema;
};

struct EndpointSpec {
  std::string verb;  // lowercase
  std::string path;  // template with {name} segments
  std::optional<std::string> operation_id;
  std::vector<ParamSpec> params;
  std::vector<BodySpec> request_bodies;
  std::vector<ResponseSpec> responses;
  std::set<std::string> tags;

  const ResponseSpec* response_for(std::string_view status) const;
  const ParamSpec* param(std::string_view name, ParamLocation loc) const;
};

struct ApiModel {
  std::string title;
  std::vector<EndpointSpec> endpoints;

  const EndpointSpec* find_operation(std::string_view operation_id) const;
};

/// Builds the typed model from the root document of a loaded graph. Never
/// fails: problems degrade to warnings (dropped links, synthesized path
/// params, cycle-cut refs).
std::pair<ApiModel, std::vector<SchemaWarning>> build_model(const SchemaGraph& graph);

/// Keeps endpoints whose path starts with `prefix` (when given) and whose tag
/// set intersects `tags` (when given). Throws ConfigError when the result has
/// no endpoints left.
ApiModel filter_endpoints(const ApiModel& model, const std::optional<std::string>& prefix,
                          const std::optional<std::set<std::string>>& tags);

/// Path-template parameter names in order of appearance.
std::vector<std::string> template_params(std::string_view path_template);

}  // namespace apifuzz
