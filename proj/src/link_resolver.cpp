#include "apifuzz/link_resolver.hpp"

#include <algorithm>
#include <set>

namespace apifuzz {

std::string link_var_name(std::size_t source_index, const std::string& pointer) {
  std::string suffix = pointer;
  std::replace(suffix.begin(), suffix.end(), '/', '_');
  return "link_" + std::to_string(source_index) + "__" + suffix;
}

namespace {

ParamLocation to_location(SlotKind kind) {
  switch (kind) {
    case SlotKind::PathParam: return ParamLocation::Path;
    case SlotKind::QueryParam: return ParamLocation::Query;
    default: return ParamLocation::Header;
  }
}

SlotKind to_slot_kind(ParamLocation loc) {
  switch (loc) {
    case ParamLocation::Path: return SlotKind::PathParam;
    case ParamLocation::Query: return SlotKind::QueryParam;
    default: return SlotKind::Header;
  }
}

void set_slot(HttpAction& action, const SlotRef& slot, JsonValue value) {
  switch (slot.kind) {
    case SlotKind::PathParam:
      action.set_path_param(slot.name, std::move(value));
      break;
    case SlotKind::QueryParam:
      action.set_query_param(slot.name, std::move(value));
      break;
    case SlotKind::Header:
      action.set_header(slot.name, value.to_display_string());
      break;
    case SlotKind::BodyField:
      break;  // links never target body fields
  }
}

}  // namespace

std::optional<SlotRef> resolve_designator(const EndpointSpec& target,
                                          const std::string& designator) {
  auto lookup = [&](SlotKind kind, const std::string& name) -> std::optional<SlotRef> {
    if (target.param(name, to_location(kind)) != nullptr) return SlotRef{kind, name};
    return std::nullopt;
  };
  if (designator.rfind("path.", 0) == 0) return lookup(SlotKind::PathParam, designator.substr(5));
  if (designator.rfind("query.", 0) == 0) return lookup(SlotKind::QueryParam, designator.substr(6));
  if (designator.rfind("header.", 0) == 0) return lookup(SlotKind::Header, designator.substr(7));
  for (SlotKind kind : {SlotKind::PathParam, SlotKind::QueryParam, SlotKind::Header})
    if (auto slot = lookup(kind, designator)) return slot;
  return std::nullopt;
}

std::optional<std::size_t> expand_link(TestCase& test, std::size_t source_index,
                                       const LinkSpec& link, const ApiModel& model,
                                       GenContext& ctx) {
  const EndpointSpec* target = model.find_operation(link.target_operation_id);
  if (!target) {
    if (ctx.warnings)
      ctx.warnings->push_back({warning_code::kLinkUnknownOperation, "", "",
                               "link " + link.name + " targets unknown operationId " +
                                   link.target_operation_id,
                               SchemaWarning::Severity::Warn});
    return std::nullopt;
  }

  HttpAction action;
  action.verb = target->verb;
  action.path_template = target->path;
  action.endpoint = target;
  action.via_link = link.name;
  action.via_link_source = source_index;

  const std::size_t target_index = test.actions.size();
  int next_id = test.fresh_binding_id();
  std::vector<Binding> new_bindings;
  std::set<std::pair<SlotKind, std::string>> claimed;

  for (const auto& [designator, lb] : link.bindings) {
    auto slot = resolve_designator(*target, designator);
    if (!slot) {
      if (ctx.warnings)
        ctx.warnings->push_back({warning_code::kLinkUnknownParam, "", "",
                                 "link " + link.name + " parameter " + designator +
                                     " matches nothing on " + target->verb + " " + target->path,
                                 SchemaWarning::Severity::Warn});
      continue;
    }
    claimed.insert({slot->kind, slot->name});
    if (lb.kind == LinkBinding::Kind::Constant) {
      set_slot(action, *slot, lb.constant);
    } else {
      Binding b;
      b.id = next_id++;
      b.source_action = source_index;
      b.extraction = lb.pointer;
      b.target_action = target_index;
      b.slot_kind = slot->kind;
      b.slot_name = slot->name;
      b.var = link_var_name(source_index, lb.pointer);
      set_slot(action, *slot, JsonValue::string("${" + b.var + "}"));
      new_bindings.push_back(std::move(b));
    }
  }

  // The link rarely binds every parameter; anything required and unbound is
  // generated so the follow-up request is well formed.
  for (const auto& p : target->params) {
    SlotKind kind = to_slot_kind(p.location);
    if (claimed.count({kind, p.name})) continue;
    if (p.location != ParamLocation::Path && !p.required) continue;
    JsonValue v = gen_value(p.schema, ctx, to_string(p.location) + "." + p.name);
    set_slot(action, SlotRef{kind, p.name}, std::move(v));
  }
  if (!target->request_bodies.empty()) {
    const BodySpec& body = target->request_bodies.front();
    action.body = gen_value(body.schema, ctx, "body");
    action.content_type = body.media_type;
  }

  test.actions.push_back(std::move(action));
  for (auto& b : new_bindings) test.bindings.push_back(std::move(b));
  return target_index;
}

std::optional<std::string> evaluate_binding(const Binding& binding,
                                            const JsonValue& source_body) {
  const JsonValue* found = source_body.walk(binding.extraction);
  if (found == nullptr || !found->is_scalar() || found->is_null()) return std::nullopt;
  return found->to_display_string();
}

bool is_var_ref(const JsonValue& v) { return var_ref_name(v).has_value(); }

std::optional<std::string> var_ref_name(const JsonValue& v) {
  if (!v.is_string()) return std::nullopt;
  const std::string& s = v.as_string();
  if (s.size() < 4 || s.rfind("${", 0) != 0 || s.back() != '}') return std::nullopt;
  std::string name = s.substr(2, s.size() - 3);
  if (name.find('}') != std::string::npos) return std::nullopt;
  return name;
}

std::string substitute_vars(const std::string& text,
                            const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '$' && i + 1 < text.size() && text[i + 1] == '{') {
      std::size_t close = text.find('}', i + 2);
      if (close != std::string::npos) {
        std::string name = text.substr(i + 2, close - (i + 2));
        auto it = vars.find(name);
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

}  // namespace apifuzz
