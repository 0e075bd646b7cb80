#include "apifuzz/engine.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

#include "apifuzz/emitter.hpp"
#include "apifuzz/link_resolver.hpp"

namespace apifuzz {

namespace {

/// Optional query parameters in declared order; index k in a presence mask
/// refers to the k-th entry here.
std::vector<const ParamSpec*> optional_query_params(const EndpointSpec& ep) {
  std::vector<const ParamSpec*> out;
  for (const auto& p : ep.params)
    if (p.location == ParamLocation::Query && !p.required) out.push_back(&p);
  return out;
}

const EndpointSpec* find_by_key(const ApiModel& model, const std::string& key) {
  for (const auto& ep : model.endpoints)
    if (endpoint_key(ep) == key) return &ep;
  return nullptr;
}

std::vector<std::string> path_segments(const std::string& path) {
  std::vector<std::string> out;
  for (auto& seg : split(path, '/'))
    if (!seg.empty()) out.push_back(seg);
  return out;
}

bool is_template_segment(const std::string& seg) {
  return seg.size() >= 2 && seg.front() == '{' && seg.back() == '}';
}

/// Last concrete (non-{param}) segment; the collection noun of a path.
std::string collection_noun(const std::string& path) {
  auto segs = path_segments(path);
  for (auto it = segs.rbegin(); it != segs.rend(); ++it)
    if (!is_template_segment(*it)) return *it;
  return "";
}

/// Whether `candidate` is `collection` plus exactly one trailing {param}
/// segment, matching segment-wise with singular/plural tolerance on the
/// collection noun. Returns 0 for an exact-path match, 1 for a noun-variant
/// match, -1 for no match.
int item_path_rank(const std::string& collection, const std::string& candidate) {
  auto base = path_segments(collection);
  auto cand = path_segments(candidate);
  if (cand.size() != base.size() + 1) return -1;
  if (!is_template_segment(cand.back())) return -1;
  bool exact = true;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (cand[i] == base[i]) continue;
    if (is_template_segment(base[i]) || is_template_segment(cand[i])) return -1;
    // Only the collection noun itself may vary between singular and plural.
    if (i + 1 == base.size() && nouns_match(cand[i], base[i])) {
      exact = false;
      continue;
    }
    return -1;
  }
  return exact ? 0 : 1;
}

/// Example value at a nested slot path, mirroring the slot naming of the
/// target universe: object fields extend the path, array items and composite
/// branches stay on it.
const JsonValue* find_example(const ValueSchema& schema, const std::vector<std::string>& segs,
                              std::size_t pos, std::size_t index) {
  if (pos == segs.size() && index < schema.examples.size()) return &schema.examples[index];
  if (pos < segs.size()) {
    for (const auto& field : schema.fields)
      if (field.name == segs[pos])
        if (const JsonValue* hit = find_example(field.schema, segs, pos + 1, index)) return hit;
  }
  if (schema.has_item())
    if (const JsonValue* hit = find_example(schema.item[0], segs, pos, index)) return hit;
  for (const auto& branch : schema.branches)
    if (const JsonValue* hit = find_example(branch, segs, pos, index)) return hit;
  return nullptr;
}

/// Plants `example` at the slot path inside `value`, creating object levels
/// as needed. Arrays are traversed through their first element (item slots
/// share the parent path). Returns false when the path cannot be realized.
bool force_example(JsonValue& value, const std::vector<std::string>& segs, std::size_t pos,
                   const JsonValue& example) {
  if (pos == segs.size()) {
    value = example;
    return true;
  }
  if (value.is_array()) {
    if (value.items().empty()) return false;
    return force_example(value.items()[0], segs, pos, example);
  }
  if (!value.is_object()) {
    if (!value.is_undefined()) return false;
    value = JsonValue::object();
  }
  for (auto& field : value.fields())
    if (field.first == segs[pos]) return force_example(field.second, segs, pos + 1, example);
  value.set(segs[pos], JsonValue::undefined());
  return force_example(value.fields().back().second, segs, pos + 1, example);
}

/// What a planned action is steered toward. At most one of the aim fields is
/// populated per plan; everything else is sampled freely.
struct PlanAim {
  std::string family;  // aimed status family: "", "2xx", "4xx", "5xx"
  const std::string* presence_mask = nullptr;
  const std::string* enum_param = nullptr;
  const std::string* enum_display = nullptr;
  bool force_example = false;
  std::string example_slot;
  std::size_t example_index = 0;
};

void log_example(GenContext& ctx, const std::string& slot, std::size_t index) {
  ctx.used_examples.push_back({slot, index});
}

/// Example-or-schema sampling over the parameter's concatenated example
/// list. gen_value never sees the root-level examples: their indices are
/// param-relative here, so the event is logged manually.
JsonValue sample_param_value(const ParamSpec& p, GenContext& ctx, const std::string& root) {
  if (!p.examples.empty() && ctx.rng.chance(ctx.cfg.example_probability)) {
    const std::size_t idx = ctx.rng.below(p.examples.size());
    log_example(ctx, root, idx);
    const JsonValue& example = p.examples[idx];
    if (example.is_object() && p.schema.type == ValueSchema::Type::Object)
      return complete_example_object(p.schema, example, ctx, root);
    return example;
  }
  ValueSchema bare = p.schema;
  bare.examples.clear();
  return gen_value(bare, ctx, root);
}

std::string join_path(const std::vector<std::string>& segs) {
  std::string out;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (i) out += "/";
    out += segs[i];
  }
  return out;
}

/// Generates a subtree with natural example usage suppressed, then plants
/// the aimed example and logs it. Falls back to the plain value when the
/// slot path cannot be realized.
JsonValue forced_value(const ValueSchema& schema, GenContext& ctx, const std::string& root,
                       const std::vector<std::string>& segs, std::size_t index) {
  const JsonValue* example = find_example(schema, segs, 0, index);
  const double saved = ctx.cfg.example_probability;
  ctx.cfg.example_probability = 0.0;
  ValueSchema bare = schema;
  bare.examples.clear();
  JsonValue value = gen_value(bare, ctx, root);
  ctx.cfg.example_probability = saved;
  if (example == nullptr) return value;
  if (segs.empty() && example->is_object() && schema.type == ValueSchema::Type::Object) {
    JsonValue completed = complete_example_object(schema, *example, ctx, root);
    log_example(ctx, root, index);
    return completed;
  }
  if (force_example(value, segs, 0, *example))
    log_example(ctx, segs.empty() ? root : root + "/" + join_path(segs), index);
  return value;
}

const JsonValue* pinned_enum_value(const ParamSpec& p, const std::string& display) {
  for (const auto& v : p.schema.enum_values)
    if (v.to_display_string() == display) return &v;
  return nullptr;
}

HttpAction plan_action(const EndpointSpec& ep, GenContext& ctx, const PlanAim& aim,
                       const ResponseDictionary* dict) {
  HttpAction action;
  action.verb = ep.verb;
  action.path_template = ep.path;
  action.endpoint = &ep;

  // Forced-example slot split: "<loc>.<name>[/nested...]" or "body[/...]".
  std::string forced_root;
  std::vector<std::string> forced_segs;
  if (aim.force_example) {
    auto segs = split(aim.example_slot, '/');
    forced_root = segs.empty() ? aim.example_slot : segs[0];
    if (!segs.empty()) forced_segs.assign(segs.begin() + 1, segs.end());
  }

  const auto optionals = optional_query_params(ep);
  for (const auto& p : ep.params) {
    const std::string root = to_string(p.location) + "." + p.name;
    const bool pinned = aim.enum_param && *aim.enum_param == p.name &&
                        !p.schema.enum_values.empty();
    const bool forced_here = aim.force_example && forced_root == root;

    bool include = true;
    if (p.location == ParamLocation::Query && !p.required) {
      if (aim.presence_mask) {
        std::size_t k = 0;
        while (k < optionals.size() && optionals[k]->name != p.name) ++k;
        include = k < aim.presence_mask->size() && (*aim.presence_mask)[k] == '1';
      } else {
        include = ctx.rng.chance(0.5);
      }
      if (pinned || forced_here) include = true;
    } else if (p.location == ParamLocation::Header && !p.required) {
      include = pinned || forced_here || ctx.rng.chance(0.25);
    }
    if (!include) continue;

    JsonValue value;
    if (pinned) {
      value = *pinned_enum_value(p, *aim.enum_display);
    } else if (forced_here && forced_segs.empty() && aim.example_index < p.examples.size()) {
      const JsonValue& example = p.examples[aim.example_index];
      value = (example.is_object() && p.schema.type == ValueSchema::Type::Object)
                  ? complete_example_object(p.schema, example, ctx, root)
                  : example;
      log_example(ctx, root, aim.example_index);
    } else if (forced_here && !forced_segs.empty()) {
      value = forced_value(p.schema, ctx, root, forced_segs, aim.example_index);
    } else {
      value = sample_param_value(p, ctx, root);
    }

    switch (p.location) {
      case ParamLocation::Path: action.set_path_param(p.name, std::move(value)); break;
      case ParamLocation::Query: action.set_query_param(p.name, std::move(value)); break;
      case ParamLocation::Header: action.set_header(p.name, value.to_display_string()); break;
    }
  }

  if (!ep.request_bodies.empty()) {
    const BodySpec& body = ep.request_bodies.front();
    if (aim.force_example && forced_root == "body") {
      if (forced_segs.empty() && aim.example_index < body.schema.examples.size()) {
        const JsonValue& example = body.schema.examples[aim.example_index];
        action.body = (example.is_object() && body.schema.type == ValueSchema::Type::Object)
                          ? complete_example_object(body.schema, example, ctx, "body")
                          : example;
        log_example(ctx, "body", aim.example_index);
      } else {
        action.body = forced_value(body.schema, ctx, "body", forced_segs, aim.example_index);
      }
    } else {
      action.body = gen_value(body.schema, ctx, "body");
    }
    action.content_type = body.media_type.empty() ? "application/json" : body.media_type;
  }

  // Read actions may reuse ids seen in earlier collection responses; write
  // actions never do, so fuzzing cannot destroy dictionary state.
  if (dict != nullptr && ep.verb == "get") {
    if (const auto* ids = dict->ids_for(ep.path); ids && !ids->empty() && ctx.rng.chance(0.5)) {
      auto params = template_params(ep.path);
      if (!params.empty()) {
        const std::string& id = (*ids)[ctx.rng.below(ids->size())];
        action.set_path_param(params.back(), JsonValue::string(id));
        action.dictionary_sourced = true;
      }
    }
  }

  if (aim.family == "4xx") {
    // One deliberate contract violation, picked uniformly among the
    // perturbations this endpoint offers.
    struct Perturbation {
      enum Kind { OmitQuery, WrongType, DropBodyField } kind;
      std::string name;
    };
    std::vector<Perturbation> options;
    for (const auto& p : ep.params) {
      if (p.location == ParamLocation::Query && p.required)
        options.push_back({Perturbation::OmitQuery, p.name});
      const bool typed = p.schema.type == ValueSchema::Type::Integer ||
                         p.schema.type == ValueSchema::Type::Number ||
                         p.schema.type == ValueSchema::Type::Boolean;
      if (typed && p.location != ParamLocation::Header)
        options.push_back({Perturbation::WrongType, p.name});
    }
    if (action.body.is_object() && !ep.request_bodies.empty())
      for (const auto& field : ep.request_bodies.front().schema.fields)
        if (field.required) options.push_back({Perturbation::DropBodyField, field.name});
    if (!options.empty()) {
      const auto& pick = options[ctx.rng.below(options.size())];
      switch (pick.kind) {
        case Perturbation::OmitQuery:
          action.set_query_param(pick.name, JsonValue::undefined());
          break;
        case Perturbation::WrongType: {
          const ParamSpec* p = ep.param(pick.name, ParamLocation::Path);
          if (p == nullptr) p = ep.param(pick.name, ParamLocation::Query);
          if (p != nullptr && p->location == ParamLocation::Path)
            action.set_path_param(pick.name, JsonValue::string("not-a-number"));
          else
            action.set_query_param(pick.name, JsonValue::string("not-a-number"));
          break;
        }
        case Perturbation::DropBodyField:
          action.body.set(pick.name, JsonValue::undefined());
          break;
      }
    }
  }

  return action;
}

void drain_events(GenContext& ctx, HttpAction& action) {
  for (auto& ev : ctx.used_examples)
    action.example_uses.emplace_back(std::move(ev.slot), ev.example_index);
  ctx.used_examples.clear();
}

TestCase plan_for_target(const CoverageTarget& target, const ApiModel& model, GenContext& ctx,
                         const ResponseDictionary* dict) {
  TestCase test;
  const EndpointSpec* ep = find_by_key(model, target.endpoint);
  if (ep == nullptr) return test;

  PlanAim aim;
  switch (target.kind) {
    case CoverageTarget::Kind::EndpointStatus:
      aim.family = target.detail;
      break;
    case CoverageTarget::Kind::OptionalCombo:
      aim.presence_mask = &target.detail;
      break;
    case CoverageTarget::Kind::EnumValue:
      aim.enum_param = &target.detail;
      aim.enum_display = &target.value;
      break;
    case CoverageTarget::Kind::ExampleUsed:
      aim.force_example = true;
      aim.example_slot = target.detail;
      aim.example_index = static_cast<std::size_t>(std::stoull(target.value));
      break;
    default:
      break;
  }

  ctx.used_examples.clear();
  test.actions.push_back(plan_action(*ep, ctx, aim, dict));
  drain_events(ctx, test.actions[0]);

  std::string aimed_link;
  if (target.kind == CoverageTarget::Kind::LinkFollowed) {
    aimed_link = target.value;
    for (const auto& resp : ep->responses) {
      if (resp.status != target.detail) continue;
      for (const auto& link : resp.links) {
        if (link.name != target.value) continue;
        if (auto idx = expand_link(test, 0, link, model, ctx))
          drain_events(ctx, test.actions[*idx]);
      }
    }
  }

  // Declared links are followed opportunistically even when the target is
  // something else; tests stay short via the action cap.
  for (const auto& resp : ep->responses) {
    for (const auto& link : resp.links) {
      if (link.name == aimed_link) continue;
      if (test.actions.size() >= 5) break;
      if (!ctx.rng.chance(0.5)) continue;
      if (auto idx = expand_link(test, 0, link, model, ctx))
        drain_events(ctx, test.actions[*idx]);
    }
  }
  return test;
}

JsonValue substitute_value(const JsonValue& v, const std::map<std::string, std::string>& vars) {
  if (v.is_string()) {
    const std::string text = v.to_display_string();
    if (text.find("${") == std::string::npos) return v;
    return JsonValue::string(substitute_vars(text, vars));
  }
  if (v.is_array()) {
    JsonValue out = JsonValue::array();
    for (const auto& item : v.items()) out.items().push_back(substitute_value(item, vars));
    return out;
  }
  if (v.is_object()) {
    JsonValue out = JsonValue::object();
    for (const auto& field : v.fields()) out.set(field.first, substitute_value(field.second, vars));
    return out;
  }
  return v;
}

/// Concrete request plus the unencoded path for logs and records.
struct Materialized {
  HttpRequest request;
  std::string display_path;
};

Materialized materialize(const HttpAction& action,
                         const std::map<std::string, std::string>& vars) {
  Materialized m;
  m.request.verb = action.verb;
  m.request.content_type = action.content_type;

  std::string encoded, display;
  for (const auto& seg : split(action.path_template, '/')) {
    if (seg.empty()) continue;
    std::string text = seg;
    if (is_template_segment(seg)) {
      const std::string name = seg.substr(1, seg.size() - 2);
      if (const JsonValue* v = action.path_param(name)) text = v->to_display_string();
    }
    text = substitute_vars(text, vars);
    display += "/" + text;
    encoded += "/" + url_encode(text);
  }
  if (encoded.empty()) {
    encoded = "/";
    display = "/";
  }
  m.request.path = encoded;
  m.display_path = display;

  for (const auto& [name, value] : action.query_params) {
    if (value.is_undefined()) continue;
    m.request.query.emplace_back(name, substitute_vars(value.to_display_string(), vars));
  }
  for (const auto& [name, value] : action.headers)
    m.request.headers.emplace_back(name, substitute_vars(value, vars));

  if (!action.body_raw.empty()) {
    m.request.body = action.body_raw;
  } else if (!action.body.is_undefined()) {
    m.request.body = substitute_value(action.body, vars).dump();
  }
  return m;
}

}  // namespace

void validate_session_config(const SessionConfig& cfg) {
  if (cfg.max_time.count() <= 0) throw ConfigError("max-time must be positive");
  if (cfg.premature_stop) {
    if (cfg.premature_stop->count() <= 0) throw ConfigError("premature-stop must be positive");
    if (*cfg.premature_stop > cfg.max_time)
      throw ConfigError("premature-stop exceeds max-time");
  }
  if (cfg.rate_per_minute && *cfg.rate_per_minute < 1)
    throw ConfigError("rate-per-minute must be at least 1");
}

Millis throttle(int rate_per_minute, Millis last_request_duration) {
  const long long slot = 60000 / rate_per_minute;
  return Millis(std::max<long long>(0, slot - last_request_duration.count()));
}

void ResponseDictionary::add(const std::string& path_template, const std::string& id,
                             Provenance origin) {
  auto& ids = entries[path_template];
  if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  provenance.emplace(id, std::move(origin));
}

const std::vector<std::string>* ResponseDictionary::ids_for(
    const std::string& path_template) const {
  auto it = entries.find(path_template);
  return it == entries.end() ? nullptr : &it->second;
}

bool collection_shaped(const EndpointSpec& endpoint) {
  if (endpoint.verb != "get") return false;
  if (!template_params(endpoint.path).empty()) return false;
  for (const auto& resp : endpoint.responses) {
    if (!resp.has_schema) continue;
    bool twoxx = false;
    for (int s : {200, 201, 202, 203, 204}) twoxx |= status_key_matches(resp.status, s);
    if (!twoxx) continue;
    if (resp.schema.type == ValueSchema::Type::Array) return true;
    if (resp.schema.type == ValueSchema::Type::Object) {
      int arrays = 0;
      for (const auto& field : resp.schema.fields)
        if (field.schema.type == ValueSchema::Type::Array) ++arrays;
      if (arrays == 1) return true;
    }
  }
  return false;
}

std::set<std::string> created_ids(const TestCase& test,
                                  const std::vector<RecordedExchange>& exchanges) {
  std::set<std::string> out;
  const std::size_t n = std::min(test.actions.size(), exchanges.size());
  for (std::size_t i = 0; i < n; ++i) {
    const HttpAction& action = test.actions[i];
    const RecordedExchange& ex = exchanges[i];
    if (action.endpoint == nullptr || action.is_login) continue;
    if (action.verb != "post" && action.verb != "put") continue;
    if (ex.status < 200 || ex.status > 299) continue;
    const std::string singular = singularize(collection_noun(action.endpoint->path));
    const std::vector<std::string> pointers = {"id", singular + "Id", "data/id",
                                               "data/" + singular + "Id"};
    for (const auto& ptr : pointers) {
      if (const JsonValue* v = ex.body.walk(ptr); v != nullptr && v->is_scalar() && !v->is_null())
        out.insert(v->to_display_string());
      if (const JsonValue* v = action.body.walk(ptr);
          v != nullptr && v->is_scalar() && !v->is_null())
        out.insert(v->to_display_string());
    }
  }
  return out;
}

void harvest_dictionary(ResponseDictionary& dict, const EndpointSpec& endpoint,
                        const RecordedExchange& exchange, const ApiModel& model, Millis now,
                        const std::set<std::string>* exclude_ids) {
  const JsonValue* items = nullptr;
  if (exchange.body.is_array()) {
    items = &exchange.body;
  } else if (exchange.body.is_object()) {
    for (const auto& field : exchange.body.fields()) {
      if (!field.second.is_array()) continue;
      if (items != nullptr) return;  // ambiguous wrapper, harvest nothing
      items = &field.second;
    }
  }
  if (items == nullptr || items->items().empty()) return;
  for (const auto& item : items->items())
    if (!item.is_object()) return;

  // Id field: "id", then "<singular>Id", then the sole scalar field whose
  // values are pairwise distinct across all items.
  const std::string singular = singularize(collection_noun(endpoint.path));
  auto field_everywhere = [&](const std::string& name) {
    for (const auto& item : items->items()) {
      const JsonValue* v = item.walk(name);
      if (v == nullptr || !v->is_scalar() || v->is_null()) return false;
    }
    return true;
  };
  std::string id_field;
  if (field_everywhere("id")) {
    id_field = "id";
  } else if (!singular.empty() && field_everywhere(singular + "Id")) {
    id_field = singular + "Id";
  } else {
    std::vector<std::string> candidates;
    for (const auto& field : items->items()[0].fields()) {
      if (!field_everywhere(field.first)) continue;
      std::set<std::string> seen;
      bool distinct = true;
      for (const auto& item : items->items())
        distinct &= seen.insert(item.walk(field.first)->to_display_string()).second;
      if (distinct) candidates.push_back(field.first);
    }
    if (candidates.size() != 1) return;
    id_field = candidates[0];
  }

  std::vector<std::string> templates;
  for (const auto& ep : model.endpoints) {
    if (item_path_rank(endpoint.path, ep.path) < 0) continue;
    if (std::find(templates.begin(), templates.end(), ep.path) == templates.end())
      templates.push_back(ep.path);
  }
  if (templates.empty()) return;

  for (const auto& item : items->items()) {
    const std::string id = item.walk(id_field)->to_display_string();
    if (exclude_ids != nullptr && exclude_ids->count(id) != 0) continue;
    for (const auto& tpl : templates)
      dict.add(tpl, id, {endpoint_key(endpoint), id_field, now});
  }
}

std::vector<std::size_t> plan_cleanup(TestCase& test,
                                      const std::vector<RecordedExchange>& exchanges,
                                      const ApiModel& model, GenContext& ctx,
                                      const ResponseDictionary* dict) {
  std::vector<std::size_t> out;
  const std::size_t executed = std::min(test.actions.size(), exchanges.size());
  for (std::size_t i = 0; i < executed; ++i) {
    const HttpAction& source = test.actions[i];
    const RecordedExchange& ex = exchanges[i];
    if (source.is_login || source.is_cleanup || source.endpoint == nullptr) continue;
    const bool twoxx = ex.status >= 200 && ex.status <= 299;
    const bool created =
        (source.verb == "post" && twoxx) || (source.verb == "put" && ex.status == 201);
    if (!created) continue;

    const EndpointSpec* del = nullptr;
    int best = 2;
    for (const auto& ep : model.endpoints) {
      if (ep.verb != "delete") continue;
      const int rank = item_path_rank(source.endpoint->path, ep.path);
      if (rank >= 0 && rank < best) {
        best = rank;
        del = &ep;
      }
    }
    if (del == nullptr) continue;

    auto params = template_params(del->path);
    if (params.empty()) continue;
    const std::string id_param = params.back();

    HttpAction d;
    d.verb = "delete";
    d.path_template = del->path;
    d.endpoint = del;
    d.is_cleanup = true;
    d.expect = {Expectation::Kind::TwoXxOr404, 0};

    // Any leading path parameters reuse the creating request's values.
    for (std::size_t k = 0; k + 1 < params.size(); ++k) {
      if (const JsonValue* v = source.path_param(params[k]))
        d.set_path_param(params[k], *v);
      else if (const ParamSpec* p = del->param(params[k], ParamLocation::Path))
        d.set_path_param(params[k], gen_value(p->schema, ctx));
    }

    const std::string singular = singularize(collection_noun(source.endpoint->path));
    std::string pointer;
    const std::vector<std::string> pointer_candidates = {
        "id", singular + "Id", "data/id", "data/" + singular + "Id"};
    for (const std::string& cand : pointer_candidates) {
      const JsonValue* v = ex.body.walk(cand);
      if (v != nullptr && v->is_scalar() && !v->is_null()) {
        pointer = cand;
        break;
      }
    }

    const std::size_t target_index = test.actions.size();
    if (!pointer.empty()) {
      Binding b;
      b.id = test.fresh_binding_id();
      b.source_action = i;
      b.extraction = pointer;
      b.target_action = target_index;
      b.slot_kind = SlotKind::PathParam;
      b.slot_name = id_param;
      std::string suffix = pointer;
      std::replace(suffix.begin(), suffix.end(), '/', '_');
      b.var = "cleanup_" + std::to_string(i) + "__" + suffix;
      d.set_path_param(id_param, JsonValue::string("${" + b.var + "}"));
      test.actions.push_back(std::move(d));
      test.bindings.push_back(std::move(b));
    } else {
      // No id in the response: fall back to a client-chosen id from the
      // request body. Harvested ids are off limits.
      const JsonValue* rid = source.body.walk("id");
      if (rid == nullptr) rid = source.body.walk(singular + "Id");
      if (rid == nullptr || !rid->is_scalar() || rid->is_null()) continue;
      const std::string id = rid->to_display_string();
      if (dict != nullptr && dict->contains_id(id)) continue;
      d.set_path_param(id_param, JsonValue::string(id));
      test.actions.push_back(std::move(d));
    }
    out.push_back(target_index);
  }
  return out;
}

std::string render_action_log(const std::vector<ActionRecord>& log) {
  std::ostringstream out;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const ActionRecord& r = log[i];
    out << i << " " << r.sent_at.count() << "ms " << r.verb << " " << r.path << " -> "
        << r.status << " (" << r.duration.count() << "ms)";
    if (r.is_login) out << " login";
    if (r.is_cleanup) out << " cleanup";
    if (r.dictionary_sourced) out << " dict";
    out << "\n";
  }
  return out.str();
}

std::pair<Archive, SessionStats> run_session(const ApiModel& model, const AuthSpec* auth,
                                             std::set<CoverageTarget> targets,
                                             const SessionConfig& cfg, HttpTransport& transport,
                                             Clock& clock, const TransformRegistry* registry) {
  validate_session_config(cfg);
  TransformRegistry builtins = TransformRegistry::with_builtins();
  const TransformRegistry& reg = registry != nullptr ? *registry : builtins;
  if (!cfg.derived_rules.empty()) validate_rules(cfg.derived_rules, reg);

  GenConfig gen = cfg.gen;
  gen.seed = cfg.seed;
  GenContext ctx(gen);
  std::vector<SchemaWarning> warnings;
  ctx.warnings = &warnings;

  Archive archive;
  archive.pending = std::move(targets);

  SessionStats stats;
  stats.started = clock.now();
  const Millis deadline = stats.started + cfg.max_time;
  Millis last_new = stats.started;
  Millis last_duration{0};
  TokenCache tokens(clock, transport);
  int consecutive_failures = 0;
  std::string stop_reason;

  auto stopped = [&]() {
    if (clock.now() >= deadline) {
      stop_reason = "budget";
      return true;
    }
    if (cfg.premature_stop && clock.now() - last_new >= *cfg.premature_stop) {
      stop_reason = "premature";
      return true;
    }
    return false;
  };

  auto throttle_before = [&]() {
    if (!cfg.rate_per_minute || stats.requests_issued == 0) return;
    const Millis w = throttle(*cfg.rate_per_minute, last_duration);
    stats.waits.push_back(w);
    if (w.count() > 0) clock.sleep_for(w);
  };

  std::map<std::string, std::string> vars;

  // Executes actions [begin, end) of the test, appending one exchange per
  // executed action. Returns false when a stop condition fired first.
  auto execute_from = [&](TestCase& test, std::vector<RecordedExchange>& exchanges,
                          std::size_t begin) {
    for (std::size_t i = begin; i < test.actions.size(); ++i) {
      if (stopped()) return false;
      HttpAction& action = test.actions[i];
      RecordedExchange ex;

      if (action.is_login && auth != nullptr && auth->is_dynamic()) {
        const bool cached = tokens.has_valid(*auth);
        if (!cached) throttle_before();
        const Millis t0 = clock.now();
        ex = tokens.login_exchange(*auth);
        if (!cached) {
          stats.requests_issued++;
          stats.action_log.push_back({action.verb, auth->login->endpoint, ex.status, false, true,
                                      false, t0, ex.duration});
          last_duration = ex.duration;
        }
      } else {
        for (const Binding* b : test.bindings_into(i))
          if (vars.count(b->var) == 0) ex.link_broken = true;

        Materialized m = materialize(action, vars);
        throttle_before();
        const Millis t0 = clock.now();
        HttpResponse resp = transport.send(m.request);
        ex.duration = clock.now() - t0;
        ex.status = resp.status;
        ex.error = resp.error;
        ex.raw_body = resp.body;
        ex.concrete_path = m.display_path;
        ex.sent_query = m.request.query;
        if (auto parsed = JsonValue::parse(resp.body))
          ex.body = std::move(*parsed);
        else if (!resp.body.empty())
          ex.body = JsonValue::string(resp.body);

        stats.requests_issued++;
        stats.action_log.push_back({action.verb, m.display_path, ex.status,
                                    action.dictionary_sourced, false, action.is_cleanup, t0,
                                    ex.duration});
        last_duration = ex.duration;

        if (ex.status == 0) {
          if (++consecutive_failures >= 30) {
            std::string where = cfg.base_url.empty() ? "the target API" : cfg.base_url;
            throw EnvironmentError("30 consecutive requests failed; " + where +
                                   " appears unreachable (last error: " +
                                   (ex.error.empty() ? "none" : ex.error) + ")");
          }
        } else {
          consecutive_failures = 0;
        }

        if (auto fault = classify_fault(action, ex)) ex.fault_code = fault->code;
        if (ex.status == 401 && auth != nullptr && auth->is_dynamic() &&
            !auth->login->lifetime)
          tokens.invalidate(auth->name);
      }

      for (const Binding* b : test.bindings_from(i))
        if (auto value = evaluate_binding(*b, ex.body)) vars[b->var] = *value;

      exchanges.push_back(std::move(ex));
    }
    return true;
  };

  while (true) {
    if (stopped()) break;
    if (archive.all_covered()) {
      stop_reason = "all-covered";
      break;
    }

    std::size_t pick = ctx.rng.below(archive.pending.size());
    auto it = archive.pending.begin();
    std::advance(it, static_cast<long>(pick));
    const CoverageTarget target = *it;

    TestCase test = plan_for_target(
        target, model, ctx, cfg.dictionary ? &stats.dictionary : nullptr);
    if (test.actions.empty()) {
      // Defensive: a target pointing at no model endpoint can never be
      // covered and must not spin the loop.
      archive.pending.erase(target);
      continue;
    }
    if (auth != nullptr) apply_auth(test, *auth);
    for (auto& action : test.actions) {
      if (action.is_login) continue;
      for (const auto& [name, value] : cfg.extra_headers) action.set_header(name, value);
      if (!cfg.derived_rules.empty() && action.body.is_object())
        action.body =
            apply_derived_params(action.body, cfg.derived_rules, reg, action.path_template);
    }

    vars.clear();
    std::vector<RecordedExchange> exchanges;
    bool complete = execute_from(test, exchanges, 0);
    if (complete && cfg.cleanup) {
      plan_cleanup(test, exchanges, model, ctx,
                   cfg.dictionary ? &stats.dictionary : nullptr);
      complete = execute_from(test, exchanges, exchanges.size());
    }

    bool leaks = false;
    if (!complete) {
      // The stop fired mid-test: keep the executed prefix.
      test.actions.resize(exchanges.size());
      std::vector<Binding> kept;
      for (auto& b : test.bindings)
        if (b.source_action < exchanges.size() && b.target_action < exchanges.size())
          kept.push_back(std::move(b));
      test.bindings = std::move(kept);

      // A truncated prefix may have created a resource whose delete never
      // ran. Archiving it would emit a test that leaks state on every
      // replay, so the whole test is dropped; its targets stay pending.
      for (std::size_t i = 0; i < exchanges.size() && !leaks; ++i) {
        const HttpAction& action = test.actions[i];
        if (action.is_cleanup || action.is_login) continue;
        const bool created =
            (action.verb == "post" && exchanges[i].status >= 200 &&
             exchanges[i].status <= 299) ||
            (action.verb == "put" && exchanges[i].status == 201);
        if (!created) continue;
        bool deleted = false;
        for (std::size_t j = i + 1; j < exchanges.size(); ++j)
          if (test.actions[j].is_cleanup && test.actions[j].verb == "delete")
            deleted = true;
        if (!deleted) leaks = true;
      }
    }

    for (std::size_t i = 0; i < exchanges.size(); ++i) {
      HttpAction& action = test.actions[i];
      if (action.is_cleanup) continue;
      action.expect = exchanges[i].status > 0
                          ? Expectation{Expectation::Kind::Exact, exchanges[i].status}
                          : Expectation{};
    }

    if (!exchanges.empty() && !leaks) {
      stats.tests_executed++;
      auto newly = record_execution(archive, test, exchanges, clock.now());
      if (!newly.empty()) last_new = clock.now();

      if (cfg.dictionary) {
        const std::set<std::string> own = created_ids(test, exchanges);
        for (std::size_t i = 0; i < exchanges.size(); ++i) {
          const HttpAction& action = test.actions[i];
          if (action.endpoint == nullptr || action.is_login) continue;
          if (action.verb != "get") continue;
          if (exchanges[i].status < 200 || exchanges[i].status > 299) continue;
          if (!collection_shaped(*action.endpoint)) continue;
          harvest_dictionary(stats.dictionary, *action.endpoint, exchanges[i], model,
                             clock.now(), &own);
        }
      }
    }
    if (!complete) break;
  }

  stats.stop_reason = stop_reason;
  stats.finished = clock.now();
  return {std::move(archive), std::move(stats)};
}

}  // namespace apifuzz
