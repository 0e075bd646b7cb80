#include "apifuzz/api_model.hpp"

#include <algorithm>

#include "apifuzz/util.hpp"

namespace apifuzz {

namespace {

constexpr int kMaxInlineDepth = 64;

const char* const kVerbs[] = {"get", "put", "post", "delete", "options", "head", "patch", "trace"};

bool value_conforms(const JsonValue& v, ValueSchema::Type type, bool nullable) {
  if (v.is_null()) return nullable;
  switch (type) {
    case ValueSchema::Type::String: return v.is_string();
    case ValueSchema::Type::Integer: return v.is_number() && v.as_int().has_value();
    case ValueSchema::Type::Number: return v.is_number();
    case ValueSchema::Type::Boolean: return v.is_bool();
    case ValueSchema::Type::Array: return v.is_array();
    case ValueSchema::Type::Object: return v.is_object();
    case ValueSchema::Type::Composite: return true;
  }
  return true;
}

/// Collects `example` plus `examples` (array or map form; map values may be
/// Example Objects carrying `value`). Keys of map-form examples are ignored.
void collect_examples(const JsonValue& node, std::vector<JsonValue>& out) {
  if (!node.is_object()) return;
  if (const JsonValue* ex = node.get("example"); ex && !ex->is_undefined()) out.push_back(*ex);
  const JsonValue* exs = node.get("examples");
  if (!exs) return;
  if (exs->is_array()) {
    for (const auto& e : exs->items()) out.push_back(e);
  } else if (exs->is_object()) {
    for (const auto& [key, entry] : exs->fields()) {
      if (entry.is_object() && entry.has("value"))
        out.push_back(*entry.get("value"));
      else
        out.push_back(entry);
    }
  }
}

void drop_nonconforming(std::vector<JsonValue>& examples, ValueSchema::Type type, bool nullable) {
  examples.erase(std::remove_if(examples.begin(), examples.end(),
                                [&](const JsonValue& v) {
                                  return !value_conforms(v, type, nullable);
                                }),
                 examples.end());
}

class ModelBuilder {
 public:
  explicit ModelBuilder(const SchemaGraph& graph) : graph_(graph) {}

  std::pair<ApiModel, std::vector<SchemaWarning>> build() {
    ApiModel model;
    const JsonValue* root = graph_.root_doc();
    if (!root || !root->is_object()) return {std::move(model), std::move(warnings_)};

    if (const JsonValue* info = root->get("info"); info && info->is_object())
      if (const JsonValue* title = info->get("title"); title && title->is_string())
        model.title = title->as_string();

    const JsonValue* paths = root->get("paths");
    if (!paths || !paths->is_object()) return {std::move(model), std::move(warnings_)};

    for (const auto& [path, item] : paths->fields()) {
      if (!item.is_object()) continue;
      std::vector<ParamSpec> shared_params;
      if (const JsonValue* params = item.get("parameters"))
        parse_params(*params, shared_params);
      for (const char* verb : kVerbs) {
        const JsonValue* op = item.get(verb);
        if (!op || !op->is_object()) continue;
        model.endpoints.push_back(build_endpoint(path, verb, *op, shared_params));
      }
    }
    resolve_links(model);
    return {std::move(model), std::move(warnings_)};
  }

 private:
  void warn(const char* code, const std::string& path, std::string message) {
    warnings_.push_back({code, graph_.root, path, std::move(message),
                         SchemaWarning::Severity::Warn});
  }

  /// Follows a $ref chain to its target node. Returns nullptr when the target
  /// is unavailable; `doc` tracks which document the result lives in.
  const JsonValue* deref(const JsonValue* node, std::string& doc,
                         std::set<std::string>& visiting) {
    while (node && node->is_object()) {
      const JsonValue* ref = node->get("$ref");
      if (!ref || !ref->is_string()) return node;
      SchemaSource src = make_source(doc);
      ResolvedRef resolved = resolve_ref(src, ref->as_string());
      std::string key = resolved.source.location + "#" + resolved.fragment;
      if (!visiting.insert(key).second) return nullptr;  // ref cycle: cut here
      auto it = graph_.nodes.find(resolved.source.location);
      if (it == graph_.nodes.end()) return nullptr;
      doc = resolved.source.location;
      node = walk_fragment(it->second, resolved.fragment);
    }
    return node;
  }

  ValueSchema parse_schema(const JsonValue* node, std::string doc, int depth,
                           std::set<std::string> visiting) {
    ValueSchema out;
    if (depth > kMaxInlineDepth) return out;
    node = deref(node, doc, visiting);
    if (!node || !node->is_object()) return out;

    if (const JsonValue* n = node->get("nullable"); n && n->is_bool()) out.nullable = n->as_bool();
    if (const JsonValue* f = node->get("format"); f && f->is_string()) out.format = f->as_string();

    for (auto [key, kind] : {std::pair{"oneOf", ValueSchema::CompositeKind::OneOf},
                             std::pair{"anyOf", ValueSchema::CompositeKind::AnyOf},
                             std::pair{"allOf", ValueSchema::CompositeKind::AllOf}}) {
      const JsonValue* list = node->get(key);
      if (list && list->is_array() && !list->items().empty()) {
        out.type = ValueSchema::Type::Composite;
        out.composite_kind = kind;
        for (const auto& branch : list->items())
          out.branches.push_back(parse_schema(&branch, doc, depth + 1, visiting));
        collect_examples(*node, out.examples);
        return out;
      }
    }

    std::string type = "object";
    if (const JsonValue* t = node->get("type"); t && t->is_string()) type = t->as_string();
    if (type == "string") out.type = ValueSchema::Type::String;
    else if (type == "integer") out.type = ValueSchema::Type::Integer;
    else if (type == "number") out.type = ValueSchema::Type::Number;
    else if (type == "boolean") out.type = ValueSchema::Type::Boolean;
    else if (type == "array") out.type = ValueSchema::Type::Array;
    else out.type = ValueSchema::Type::Object;

    if (const JsonValue* p = node->get("pattern"); p && p->is_string())
      out.pattern = p->as_string();
    if (const JsonValue* m = node->get("minimum"); m && m->is_number())
      out.minimum = m->as_double();
    if (const JsonValue* m = node->get("maximum"); m && m->is_number())
      out.maximum = m->as_double();
    if (const JsonValue* m = node->get("minLength"); m && m->is_number())
      out.min_length = m->as_int().value_or(0);
    if (const JsonValue* m = node->get("maxLength"); m && m->is_number())
      out.max_length = m->as_int().value_or(0);

    if (const JsonValue* en = node->get("enum"); en && en->is_array()) {
      for (const auto& v : en->items())
        if (value_conforms(v, out.type, out.nullable)) out.enum_values.push_back(v);
      if (out.enum_values.empty() && !en->items().empty())
        warn(warning_code::kUnsatisfiableConstraints, "",
             "enum has no value conforming to type '" + type + "'; treating as unconstrained");
    }

    if (out.type == ValueSchema::Type::Object) {
      std::set<std::string> required;
      if (const JsonValue* req = node->get("required"); req && req->is_array())
        for (const auto& r : req->items())
          if (r.is_string()) required.insert(r.as_string());
      if (const JsonValue* props = node->get("properties"); props && props->is_object()) {
        for (const auto& [name, prop] : props->fields()) {
          SchemaField field;
          field.name = name;
          field.required = required.count(name) > 0;
          field.schema = parse_schema(&prop, doc, depth + 1, visiting);
          out.fields.push_back(std::move(field));
        }
      }
    } else if (out.type == ValueSchema::Type::Array) {
      if (const JsonValue* items = node->get("items"))
        out.item.push_back(parse_schema(items, doc, depth + 1, visiting));
    }

    collect_examples(*node, out.examples);
    drop_nonconforming(out.examples, out.type, out.nullable);
    return out;
  }

  void parse_params(const JsonValue& list, std::vector<ParamSpec>& out) {
    if (!list.is_array()) return;
    for (const auto& entry : list.items()) {
      std::string doc = graph_.root;
      std::set<std::string> visiting;
      const JsonValue* p = deref(&entry, doc, visiting);
      if (!p || !p->is_object()) continue;
      const JsonValue* name = p->get("name");
      const JsonValue* in = p->get("in");
      if (!name || !name->is_string() || !in || !in->is_string()) continue;
      ParamSpec spec;
      spec.name = name->as_string();
      std::string loc = in->as_string();
      if (loc == "path") spec.location = ParamLocation::Path;
      else if (loc == "query") spec.location = ParamLocation::Query;
      else if (loc == "header") spec.location = ParamLocation::Header;
      else continue;  // cookie and friends are out of scope
      if (const JsonValue* req = p->get("required"); req && req->is_bool())
        spec.required = req->as_bool();
      if (spec.location == ParamLocation::Path) spec.required = true;
      if (const JsonValue* schema = p->get("schema"))
        spec.schema = parse_schema(schema, doc, 0, {});
      else
        spec.schema.type = ValueSchema::Type::String;
      collect_examples(*p, spec.examples);
      for (const auto& ex : spec.schema.examples) spec.examples.push_back(ex);
      drop_nonconforming(spec.examples, spec.schema.type, spec.schema.nullable);

      // Same (name, location) later in the list replaces earlier entries, so
      // operation-level parameters override path-level ones.
      auto dup = std::find_if(out.begin(), out.end(), [&](const ParamSpec& existing) {
        return existing.name == spec.name && existing.location == spec.location;
      });
      if (dup != out.end())
        *dup = std::move(spec);
      else
        out.push_back(std::move(spec));
    }
  }

  LinkSpec parse_link(const std::string& name, const JsonValue& link, const std::string& at) {
    LinkSpec spec;
    spec.name = name;
    if (const JsonValue* op = link.get("operationId"); op && op->is_string())
      spec.target_operation_id = op->as_string();
    const JsonValue* params = link.get("parameters");
    if (params && params->is_object()) {
      for (const auto& [designator, expr] : params->fields()) {
        LinkBinding binding;
        if (expr.is_string() && starts_with(expr.as_string(), "$")) {
          const std::string& raw = expr.as_string();
          if (starts_with(raw, "$response.body")) {
            binding.kind = LinkBinding::Kind::ResponseExtraction;
            binding.pointer = normalize_pointer(raw);
          } else {
            warn(warning_code::kUnsupportedExpression, at + "/parameters/" + designator,
                 "runtime expression '" + raw + "' is not supported; binding dropped");
            continue;
          }
        } else {
          binding.kind = LinkBinding::Kind::Constant;
          binding.constant = expr;
        }
        spec.bindings.emplace_back(designator, std::move(binding));
      }
    }
    return spec;
  }

  EndpointSpec build_endpoint(const std::string& path, const char* verb, const JsonValue& op,
                              const std::vector<ParamSpec>& shared_params) {
    EndpointSpec ep;
    ep.path = path;
    ep.verb = verb;
    if (const JsonValue* id = op.get("operationId"); id && id->is_string())
      ep.operation_id = id->as_string();
    if (const JsonValue* tags = op.get("tags"); tags && tags->is_array())
      for (const auto& t : tags->items())
        if (t.is_string()) ep.tags.insert(t.as_string());

    ep.params = shared_params;
    if (const JsonValue* params = op.get("parameters")) parse_params(*params, ep.params);

    // The path template is authoritative: every {name} needs one required
    // path parameter, synthesized as a plain string when undeclared. Declared
    // path parameters without a template slot are unusable and dropped.
    const std::vector<std::string> names = template_params(path);
    for (const auto& name : names) {
      if (ep.param(name, ParamLocation::Path)) continue;
      warn(warning_code::kPathParamUndeclared, "paths/" + path + "/" + ep.verb,
           "path parameter '" + name + "' is not declared; assuming type string");
      ParamSpec synthesized;
      synthesized.name = name;
      synthesized.location = ParamLocation::Path;
      synthesized.required = true;
      synthesized.schema.type = ValueSchema::Type::String;
      ep.params.push_back(std::move(synthesized));
    }
    ep.params.erase(std::remove_if(ep.params.begin(), ep.params.end(),
                                   [&](const ParamSpec& p) {
                                     return p.location == ParamLocation::Path &&
                                            std::find(names.begin(), names.end(), p.name) ==
                                                names.end();
                                   }),
                    ep.params.end());

    if (const JsonValue* body = op.get("requestBody")) {
      std::string doc = graph_.root;
      std::set<std::string> visiting;
      const JsonValue* b = deref(body, doc, visiting);
      if (b && b->is_object()) {
        if (const JsonValue* content = b->get("content"); content && content->is_object()) {
          for (const auto& [media, entry] : content->fields()) {
            BodySpec spec;
            spec.media_type = media;
            if (const JsonValue* schema = entry.is_object() ? entry.get("schema") : nullptr)
              spec.schema = parse_schema(schema, doc, 0, {});
            ep.request_bodies.push_back(std::move(spec));
          }
        }
      }
    }

    if (const JsonValue* responses = op.get("responses"); responses && responses->is_object()) {
      for (const auto& [status, response] : responses->fields()) {
        if (!is_status_key(status)) continue;  // misplaced keys already flagged by validation
        ResponseSpec rs;
        rs.status = status;
        std::string doc = graph_.root;
        std::set<std::string> visiting;
        const JsonValue* r = deref(&response, doc, visiting);
        if (r && r->is_object()) {
          if (const JsonValue* content = r->get("content"); content && content->is_object()) {
            for (const auto& [media, entry] : content->fields()) {
              const JsonValue* schema = entry.is_object() ? entry.get("schema") : nullptr;
              if (schema) {
                rs.schema = parse_schema(schema, doc, 0, {});
                rs.has_schema = true;
                break;  // first media type wins
              }
            }
          }
          if (const JsonValue* links = r->get("links"); links && links->is_object()) {
            std::string at = "paths/" + path + "/" + ep.verb + "/responses/" + status + "/links";
            for (const auto& [link_name, link] : links->fields())
              if (link.is_object()) rs.links.push_back(parse_link(link_name, link, at));
          }
        }
        ep.responses.push_back(std::move(rs));
      }
    }
    return ep;
  }

  static bool is_status_key(const std::string& key) {
    if (key == "default") return true;
    if (key.size() != 3 || !std::isdigit(static_cast<unsigned char>(key[0]))) return false;
    for (size_t i = 1; i < 3; ++i)
      if (!std::isdigit(static_cast<unsigned char>(key[i])) && key[i] != 'X' && key[i] != 'x')
        return false;
    return true;
  }

  /// Drops links whose target operation does not exist in the model.
  void resolve_links(ApiModel& model) {
    std::set<std::string> known;
    for (const auto& ep : model.endpoints)
      if (ep.operation_id) known.insert(*ep.operation_id);
    for (auto& ep : model.endpoints) {
      for (auto& rs : ep.responses) {
        rs.links.erase(std::remove_if(rs.links.begin(), rs.links.end(),
                                      [&](const LinkSpec& link) {
                                        if (known.count(link.target_operation_id)) return false;
                                        warn(warning_code::kLinkDropped,
                                             "paths/" + ep.path + "/" + ep.verb + "/responses/" +
                                                 rs.status + "/links/" + link.name,
                                             "link targets unknown operationId '" +
                                                 link.target_operation_id + "'; link dropped");
                                        return true;
                                      }),
                       rs.links.end());
      }
    }
  }

  const SchemaGraph& graph_;
  std::vector<SchemaWarning> warnings_;
};

}  // namespace

std::string to_string(ParamLocation loc) {
  switch (loc) {
    case ParamLocation::Path: return "path";
    case ParamLocation::Query: return "query";
    case ParamLocation::Header: return "header";
  }
  return "query";
}

const SchemaField* ValueSchema::field(std::string_view name) const {
  for (const auto& f : fields)
    if (f.name == name) return &f;
  return nullptr;
}

const ResponseSpec* EndpointSpec::response_for(std::string_view status) const {
  for (const auto& r : responses)
    if (r.status == status) return &r;
  return nullptr;
}

const ParamSpec* EndpointSpec::param(std::string_view name, ParamLocation loc) const {
  for (const auto& p : params)
    if (p.name == name && p.location == loc) return &p;
  return nullptr;
}

const EndpointSpec* ApiModel::find_operation(std::string_view operation_id) const {
  for (const auto& ep : endpoints)
    if (ep.operation_id && *ep.operation_id == operation_id) return &ep;
  return nullptr;
}

std::vector<std::string> template_params(std::string_view path_template) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t open = path_template.find('{', pos);
    if (open == std::string_view::npos) break;
    size_t close = path_template.find('}', open + 1);
    if (close == std::string_view::npos) break;
    out.emplace_back(path_template.substr(open + 1, close - open - 1));
    pos = close + 1;
  }
  return out;
}

std::pair<ApiModel, std::vector<SchemaWarning>> build_model(const SchemaGraph& graph) {
  return ModelBuilder(graph).build();
}

ApiModel filter_endpoints(const ApiModel& model, const std::optional<std::string>& prefix,
                          const std::optional<std::set<std::string>>& tags) {
  ApiModel out;
  out.title = model.title;
  for (const auto& ep : model.endpoints) {
    if (prefix && !starts_with(ep.path, *prefix)) continue;
    if (tags) {
      bool hit = false;
      for (const auto& t : ep.tags)
        if (tags->count(t)) {
          hit = true;
          break;
        }
      if (!hit) continue;
    }
    out.endpoints.push_back(ep);
  }
  if ((prefix || tags) && out.endpoints.empty())
    throw ConfigError("endpoint filter matches no endpoint");
  return out;
}

}  // namespace apifuzz
