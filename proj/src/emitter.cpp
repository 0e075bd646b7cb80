#include "apifuzz/emitter.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "apifuzz/link_resolver.hpp"
#include "apifuzz/yaml_io.hpp"

namespace apifuzz {

namespace {

constexpr const char* kMismatchLead =
    "Fault101. Received A Response From API With A Structure/Data That Is Not Matching Its "
    "Schema.";

std::string instance_type_name(const JsonValue& v) {
  if (v.is_null() || v.is_undefined()) return "null";
  if (v.is_bool()) return "boolean";
  if (v.is_number()) {
    const std::string text = v.to_display_string();
    std::size_t i = (!text.empty() && text[0] == '-') ? 1 : 0;
    bool integral = i < text.size();
    for (; i < text.size(); ++i)
      integral &= std::isdigit(static_cast<unsigned char>(text[i])) != 0;
    return integral ? "integer" : "number";
  }
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  return "object";
}

std::string schema_type_name(ValueSchema::Type t) {
  switch (t) {
    case ValueSchema::Type::String: return "string";
    case ValueSchema::Type::Integer: return "integer";
    case ValueSchema::Type::Number: return "number";
    case ValueSchema::Type::Boolean: return "boolean";
    case ValueSchema::Type::Array: return "array";
    default: return "object";
  }
}

void collect_allowed(const ValueSchema& schema, std::vector<std::string>& out) {
  if (schema.type == ValueSchema::Type::Composite) {
    for (const auto& branch : schema.branches) collect_allowed(branch, out);
    return;
  }
  const std::string name = schema_type_name(schema.type);
  if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
}

std::string quoted_list(const std::vector<std::string>& names) {
  std::string out = "[";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += "\"" + names[i] + "\"";
  }
  return out + "]";
}

FaultInfo type_fault(const ValueSchema& schema, const JsonValue& value, const std::string& ptr) {
  FaultInfo f;
  f.code = 101;
  f.type_key = "validation.response.body.schema.type";
  f.pointer = ptr;
  f.instance_type = instance_type_name(value);
  collect_allowed(schema, f.allowed);
  f.message = std::string(kMismatchLead) + " Type: " + f.type_key + ". [Path '" + ptr +
              "'] Instance type (" + f.instance_type +
              ") does not match any allowed primitive type (allowed: " + quoted_list(f.allowed) +
              ")";
  return f;
}

/// First schema violation in the value, depth-first. Extra fields are never
/// violations; only what the schema declares is checked.
std::optional<FaultInfo> check_value(const ValueSchema& schema, const JsonValue& value,
                                     const std::string& ptr) {
  if (value.is_undefined()) return std::nullopt;
  if (value.is_null()) {
    if (schema.nullable) return std::nullopt;
    return type_fault(schema, value, ptr);
  }
  switch (schema.type) {
    case ValueSchema::Type::String:
      if (!value.is_string()) return type_fault(schema, value, ptr);
      return std::nullopt;
    case ValueSchema::Type::Boolean:
      if (!value.is_bool()) return type_fault(schema, value, ptr);
      return std::nullopt;
    case ValueSchema::Type::Integer:
      if (!value.is_number() || instance_type_name(value) != "integer")
        return type_fault(schema, value, ptr);
      return std::nullopt;
    case ValueSchema::Type::Number:
      if (!value.is_number()) return type_fault(schema, value, ptr);
      return std::nullopt;
    case ValueSchema::Type::Array: {
      if (!value.is_array()) return type_fault(schema, value, ptr);
      if (schema.has_item())
        for (std::size_t i = 0; i < value.items().size(); ++i)
          if (auto f = check_value(schema.item[0], value.items()[i],
                                   ptr + "/" + std::to_string(i)))
            return f;
      return std::nullopt;
    }
    case ValueSchema::Type::Object: {
      if (!value.is_object()) return type_fault(schema, value, ptr);
      std::vector<std::string> missing;
      for (const auto& field : schema.fields) {
        if (!field.required) continue;
        const JsonValue* v = value.walk(field.name);
        if (v == nullptr || v->is_undefined()) missing.push_back(field.name);
      }
      if (!missing.empty()) {
        std::sort(missing.begin(), missing.end());
        FaultInfo f;
        f.code = 101;
        f.type_key = "validation.response.body.schema.required";
        f.pointer = ptr;
        f.message = std::string(kMismatchLead) + " Type: " + f.type_key + ". [Path '" + ptr +
                    "'] Object has missing required properties (" + quoted_list(missing) + ")";
        return f;
      }
      for (const auto& field : schema.fields) {
        const JsonValue* v = value.walk(field.name);
        if (v == nullptr) continue;
        if (auto f = check_value(field.schema, *v, ptr + "/" + field.name)) return f;
      }
      return std::nullopt;
    }
    case ValueSchema::Type::Composite: {
      if (schema.composite_kind == ValueSchema::CompositeKind::AllOf) {
        for (const auto& branch : schema.branches)
          if (auto f = check_value(branch, value, ptr)) return f;
        return std::nullopt;
      }
      for (const auto& branch : schema.branches)
        if (!check_value(branch, value, ptr)) return std::nullopt;
      return type_fault(schema, value, ptr);
    }
  }
  return std::nullopt;
}

/// Declared response matching a status, preferring exact keys over "2XX"
/// wildcards over "default".
const ResponseSpec* matching_response(const EndpointSpec& ep, int status) {
  const ResponseSpec* wildcard = nullptr;
  const ResponseSpec* fallback = nullptr;
  for (const auto& resp : ep.responses) {
    if (resp.status == std::to_string(status)) return &resp;
    if (!status_key_matches(resp.status, status)) continue;
    if (resp.status == "default")
      fallback = fallback ? fallback : &resp;
    else
      wildcard = wildcard ? wildcard : &resp;
  }
  return wildcard != nullptr ? wildcard : fallback;
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

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string quote(const std::string& s) { return JsonValue::string(s).dump(); }

std::vector<std::string> summary_lines(const std::string& summary) {
  return summary.empty() ? std::vector<std::string>{} : split(summary, '\n');
}

std::string shell_single_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\"'\"'";
    else
      out += c;
  }
  return out + "'";
}

/// ${var} placeholders survive as shell variables; everything else is
/// percent-encoded per segment.
std::string curl_path(const HttpAction& action) {
  std::string out;
  for (const auto& seg : path_segments(action.path_template)) {
    std::string text = seg;
    if (is_template_segment(seg)) {
      const std::string name = seg.substr(1, seg.size() - 2);
      if (const JsonValue* v = action.path_param(name)) text = v->to_display_string();
    }
    out += "/" + (text.find("${") != std::string::npos ? text : url_encode(text));
  }
  return out.empty() ? "/" : out;
}

std::string python_extractor(const std::string& pointer) {
  std::string expr = "d";
  for (const auto& seg : split(pointer, '/')) {
    if (seg.empty()) continue;
    expr += "[\"" + seg + "\"]";
  }
  return "import json,sys; d=json.load(sys.stdin); print(" + expr + ")";
}

int to_int(const JsonValue& v) {
  try {
    return std::stoi(v.to_display_string());
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

std::optional<FaultInfo> classify_fault(const HttpAction& action, const RecordedExchange& ex) {
  if (action.endpoint == nullptr || ex.status <= 0) return std::nullopt;
  if (ex.status >= 500) {
    FaultInfo f;
    f.code = 100;
    f.type_key = "http.response.status.5xx";
    f.message = "Fault100. Received A 5xx Server Error Response From API. Type: " + f.type_key +
                ". [Status '" + std::to_string(ex.status) + "']";
    return f;
  }
  if (ex.status < 200 || ex.status > 299) return std::nullopt;

  const ResponseSpec* declared = matching_response(*action.endpoint, ex.status);
  if (declared == nullptr) {
    FaultInfo f;
    f.code = 101;
    f.type_key = "validation.response.status.undeclared";
    f.message = std::string(kMismatchLead) + " Type: " + f.type_key + ". [Status '" +
                std::to_string(ex.status) + "'] Status code " + std::to_string(ex.status) +
                " is not declared in the schema";
    return f;
  }
  if (!declared->has_schema || ex.raw_body.empty()) return std::nullopt;
  return check_value(declared->schema, ex.body, "");
}

std::string name_test(std::size_t index, const TestCase& test,
                      const std::vector<RecordedExchange>& exchanges) {
  const std::size_t n = std::min(test.actions.size(), exchanges.size());
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t chosen = npos;
  for (std::size_t i = 0; i < n; ++i) {
    if (test.actions[i].is_login) continue;
    if (exchanges[i].fault_code != 0 || exchanges[i].status >= 500) {
      chosen = i;
      break;
    }
  }
  if (chosen == npos)
    for (std::size_t i = 0; i < n; ++i)
      if (!test.actions[i].is_login && !test.actions[i].is_cleanup) chosen = i;
  if (chosen == npos)
    for (std::size_t i = 0; i < n; ++i)
      if (!test.actions[i].is_login) chosen = i;
  if (chosen == npos) return "test_" + std::to_string(index) + "_empty";

  const HttpAction& action = test.actions[chosen];
  const RecordedExchange& ex = exchanges[chosen];

  const auto segs = path_segments(action.path_template);
  std::size_t last_concrete = npos;
  for (std::size_t i = 0; i < segs.size(); ++i)
    if (!is_template_segment(segs[i])) last_concrete = i;

  std::string noun = last_concrete == npos ? "root" : segs[last_concrete];
  const bool params_follow = last_concrete != npos && last_concrete + 1 < segs.size();
  if (params_follow) noun = singularize(noun);

  std::string phrase = action.verb + "On" + pascal_case(noun);
  if (ex.fault_code == 101)
    phrase += "ReturnsMismatchResponseWithSchema";
  else if (ex.status > 0)
    phrase += "Returns" + std::to_string(ex.status);
  else
    phrase += "ReturnsNoResponse";
  return "test_" + std::to_string(index) + "_" + phrase;
}

std::string summarize(const TestCase& test, const std::vector<RecordedExchange>& exchanges) {
  const std::size_t n = std::min(test.actions.size(), exchanges.size());
  std::vector<std::string> lines;

  lines.push_back("Calls:");
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const HttpAction& action = test.actions[i];
    if (action.is_login) continue;
    ++k;
    lines.push_back(std::to_string(k) + " - (" + std::to_string(exchanges[i].status) + ") " +
                    upper(action.verb) + ":" + action.path_template);
  }

  std::map<int, int> fault_counts;
  for (std::size_t i = 0; i < n; ++i) {
    if (test.actions[i].is_login) continue;
    int code = exchanges[i].fault_code;
    if (code == 0 && exchanges[i].status >= 500) code = 100;
    if (code != 0) fault_counts[code]++;
  }
  for (const auto& [code, count] : fault_counts)
    lines.push_back("Found " + std::to_string(count) + " potential fault" +
                    (count == 1 ? "" : "s") + " of type-code " + std::to_string(code));

  std::vector<std::string> link_lines;
  for (std::size_t i = 0; i < n; ++i) {
    const HttpAction& action = test.actions[i];
    if (action.is_login || action.via_link.empty()) continue;
    if (exchanges[i].link_broken || action.via_link_source >= n) continue;
    const HttpAction& source = test.actions[action.via_link_source];
    const RecordedExchange& source_ex = exchanges[action.via_link_source];
    if (source.endpoint == nullptr || source_ex.status <= 0) continue;
    for (const auto& resp : source.endpoint->responses) {
      bool declares = false;
      for (const auto& link : resp.links) declares |= link.name == action.via_link;
      if (declares && status_key_matches(resp.status, source_ex.status)) {
        link_lines.push_back("  " + resp.status + ":" + action.via_link);
        break;
      }
    }
  }
  if (!link_lines.empty()) {
    lines.push_back("Followed " + std::to_string(link_lines.size()) + " link" +
                    (link_lines.size() == 1 ? "" : "s") + ":");
    lines.insert(lines.end(), link_lines.begin(), link_lines.end());
  }

  std::vector<std::string> example_lines;
  for (std::size_t i = 0; i < n; ++i) {
    if (test.actions[i].is_login) continue;
    for (const auto& [slot, index] : test.actions[i].example_uses)
      example_lines.push_back("  " + slot + "[" + std::to_string(index) + "]");
  }
  if (!example_lines.empty()) {
    lines.push_back("Used " + std::to_string(example_lines.size()) + " example" +
                    (example_lines.size() == 1 ? "" : "s") + ":");
    lines.insert(lines.end(), example_lines.begin(), example_lines.end());
  }

  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += "\n";
    out += lines[i];
  }
  return out;
}

std::vector<TestPlan> make_plans(const std::vector<const Archive::ArchivedTest*>& entries) {
  std::vector<TestPlan> plans;
  plans.reserve(entries.size());
  for (std::size_t idx = 0; idx < entries.size(); ++idx) {
    const Archive::ArchivedTest& entry = *entries[idx];
    TestPlan plan;
    plan.test = entry.test;
    plan.exchanges = entry.exchanges;
    const std::size_t n = std::min(plan.test.actions.size(), plan.exchanges.size());
    for (std::size_t i = 0; i < n; ++i)
      plan.faults.push_back(classify_fault(plan.test.actions[i], plan.exchanges[i]));
    plan.faults.resize(plan.test.actions.size());
    plan.name = name_test(idx, plan.test, plan.exchanges);
    plan.summary = summarize(plan.test, plan.exchanges);
    plans.push_back(std::move(plan));
  }
  return plans;
}

std::string render_suite_yaml(const std::vector<TestPlan>& plans) {
  std::ostringstream out;
  out << "# apifuzz test suite\n";
  out << "# tests: " << plans.size() << "\n";
  out << "suite:\n";
  out << "  name: \"apifuzz-suite\"\n";
  out << "  created-with: \"apifuzz\"\n";
  out << "  base-url-var: \"API_BASE_URL\"\n";
  if (plans.empty()) {
    out << "tests: []\n";
    return out.str();
  }
  out << "tests:\n";
  for (const TestPlan& plan : plans) {
    for (const auto& line : summary_lines(plan.summary)) {
      out << "  #";
      if (!line.empty()) out << " " << line;
      out << "\n";
    }
    out << "  - name: " << quote(plan.name) << "\n";
    out << "    summary: |-\n";
    for (const auto& line : summary_lines(plan.summary)) out << "      " << line << "\n";
    out << "    steps:\n";
    for (std::size_t i = 0; i < plan.test.actions.size(); ++i) {
      const HttpAction& action = plan.test.actions[i];
      out << "      - verb: " << quote(action.verb) << "\n";
      out << "        path: " << quote(action.path_template) << "\n";
      out << "        timeout-ms: 60000\n";

      bool any_query = false;
      for (const auto& [name, value] : action.query_params) any_query |= !value.is_undefined();
      if (any_query) {
        out << "        query:\n";
        for (const auto& [name, value] : action.query_params) {
          if (value.is_undefined()) continue;
          out << "          " << quote(name) << ": " << quote(value.to_display_string()) << "\n";
        }
      }
      if (!action.headers.empty()) {
        out << "        headers:\n";
        for (const auto& [name, value] : action.headers)
          out << "          " << quote(name) << ": " << quote(value) << "\n";
      }
      if (!action.path_template.empty()) {
        // Path parameter values appear inline in the path only at replay
        // time; record them so the template stays substitutable.
        bool any_path = false;
        for (const auto& [name, value] : action.path_params) any_path |= !value.is_undefined();
        if (any_path) {
          out << "        path-params:\n";
          for (const auto& [name, value] : action.path_params) {
            if (value.is_undefined()) continue;
            out << "          " << quote(name) << ": " << quote(value.to_display_string())
                << "\n";
          }
        }
      }
      if (!action.body_raw.empty()) {
        out << "        content-type: " << quote(action.content_type) << "\n";
        out << "        body-raw: " << quote(action.body_raw) << "\n";
      } else if (!action.body.is_undefined()) {
        out << "        content-type: " << quote(action.content_type) << "\n";
        if (action.body.is_null())
          out << "        body: null\n";
        else
          out << "        body: " << quote(action.body.dump()) << "\n";
      }

      std::set<std::string> seen_vars;
      std::vector<const Binding*> extracts;
      for (const Binding* b : plan.test.bindings_from(i))
        if (seen_vars.insert(b->var).second) extracts.push_back(b);
      if (!extracts.empty()) {
        out << "        extract:\n";
        for (const Binding* b : extracts) {
          out << "          - var: " << quote(b->var) << "\n";
          out << "            from: " << quote(b->extraction) << "\n";
        }
      }

      const std::optional<FaultInfo>& fault =
          i < plan.faults.size() ? plan.faults[i] : std::optional<FaultInfo>{};
      const bool type_check = fault && fault->code == 101 &&
                              fault->type_key == "validation.response.body.schema.type";
      const Expectation& expect = action.expect;
      if (expect.kind != Expectation::Kind::None || type_check) {
        out << "        expect:\n";
        switch (expect.kind) {
          case Expectation::Kind::Exact:
            out << "          status: " << expect.value << "\n";
            break;
          case Expectation::Kind::Family:
            out << "          status-family: \"" << expect.value << "xx\"\n";
            break;
          case Expectation::Kind::TwoXxOr404:
            out << "          status-family: \"2xx-or-404\"\n";
            break;
          case Expectation::Kind::None:
            break;
        }
        if (type_check) {
          out << "          body-checks:\n";
          out << "            - path: " << quote(fault->pointer) << "\n";
          out << "              instance-type: " << quote(fault->instance_type) << "\n";
        }
      }
    }
  }
  return out.str();
}

std::string render_curl_script(const std::vector<TestPlan>& plans) {
  std::ostringstream out;
  out << "#!/usr/bin/env bash\n";
  out << "# apifuzz curl export\n";
  out << "# tests: " << plans.size() << "\n";
  out << "set -u\n";
  out << ": \"${API_BASE_URL:=http://localhost:8080}\"\n";
  for (const TestPlan& plan : plans) {
    out << "\n";
    out << "echo " << shell_single_quote("== " + plan.name + " ==") << "\n";
    for (const auto& line : summary_lines(plan.summary)) {
      out << "#";
      if (!line.empty()) out << " " << line;
      out << "\n";
    }
    for (std::size_t i = 0; i < plan.test.actions.size(); ++i) {
      const HttpAction& action = plan.test.actions[i];

      std::string url = "$API_BASE_URL" + curl_path(action);
      std::string qs;
      for (const auto& [name, value] : action.query_params) {
        if (value.is_undefined()) continue;
        const std::string v = value.to_display_string();
        qs += qs.empty() ? "?" : "&";
        qs += url_encode(name) + "=" +
              (v.find("${") != std::string::npos ? v : url_encode(v));
      }
      url += qs;

      std::string cmd = "curl -sS -X " + upper(action.verb) + " \"" + url + "\"";
      for (const auto& [name, value] : action.headers)
        cmd += " -H " + shell_single_quote(name + ": " + value);
      if (!action.body_raw.empty()) {
        cmd += " -H " + shell_single_quote("Content-Type: " + action.content_type);
        cmd += " --data-raw " + shell_single_quote(action.body_raw);
      } else if (!action.body.is_undefined()) {
        cmd += " -H " + shell_single_quote("Content-Type: " + action.content_type);
        cmd += " --data-raw " + shell_single_quote(action.body.dump());
      }

      std::set<std::string> seen_vars;
      std::vector<const Binding*> extracts;
      for (const Binding* b : plan.test.bindings_from(i))
        if (seen_vars.insert(b->var).second) extracts.push_back(b);

      if (extracts.empty()) {
        out << cmd << "\n";
        out << "echo\n";
      } else {
        out << "response_" << i << "=$(" << cmd << ")\n";
        out << "echo \"$response_" << i << "\"\n";
        for (const Binding* b : extracts)
          out << b->var << "=$(printf '%s' \"$response_" << i << "\" | python3 -c "
              << shell_single_quote(python_extractor(b->extraction)) << ")\n";
      }
    }
  }
  return out.str();
}

std::string emit_suite(const std::vector<TestPlan>& plans, const std::string& out_dir,
                       EmitFormat format) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw EnvironmentError("cannot create output directory " + out_dir + ": " +
                                 ec.message());
  const std::string path =
      (fs::path(out_dir) / (format == EmitFormat::PlanYaml ? "suite.yaml" : "suite.sh"))
          .string();
  std::ofstream file(path, std::ios::binary);
  if (!file) throw EnvironmentError("cannot write " + path);
  file << (format == EmitFormat::PlanYaml ? render_suite_yaml(plans)
                                          : render_curl_script(plans));
  file.close();
  if (!file) throw EnvironmentError("cannot write " + path);
  return path;
}

ReplayReport replay_suite(const std::string& yaml_text, HttpTransport& transport) {
  std::string error;
  auto doc = parse_yaml(yaml_text, &error);
  if (!doc || !doc->is_object())
    throw ConfigError("suite file is not parseable YAML" +
                      (error.empty() ? "" : ": " + error));
  const JsonValue* tests = doc->walk("tests");
  if (tests == nullptr || !tests->is_array())
    throw ConfigError("suite file has no tests list");

  ReplayReport report;
  for (const JsonValue& t : tests->items()) {
    ReplayReport::TestResult tr;
    if (const JsonValue* name = t.walk("name")) tr.name = name->to_display_string();
    const JsonValue* steps = t.walk("steps");
    if (steps == nullptr || !steps->is_array())
      throw ConfigError("test " + tr.name + " has no steps list");

    std::map<std::string, std::string> vars;
    for (const JsonValue& s : steps->items()) {
      ReplayReport::StepResult sr;
      HttpRequest req;
      if (const JsonValue* v = s.walk("verb")) req.verb = v->to_display_string();
      std::string path_template;
      if (const JsonValue* v = s.walk("path")) path_template = v->to_display_string();

      std::map<std::string, std::string> path_params;
      if (const JsonValue* pp = s.walk("path-params"); pp != nullptr && pp->is_object())
        for (const auto& field : pp->fields())
          path_params[field.first] = field.second.to_display_string();

      std::string encoded, display;
      for (const auto& seg : split(path_template, '/')) {
        if (seg.empty()) continue;
        std::string text = seg;
        if (seg.size() >= 2 && seg.front() == '{' && seg.back() == '}') {
          auto it = path_params.find(seg.substr(1, seg.size() - 2));
          if (it != path_params.end()) text = it->second;
        }
        text = substitute_vars(text, vars);
        display += "/" + text;
        encoded += "/" + url_encode(text);
      }
      req.path = encoded.empty() ? "/" : encoded;
      sr.verb = req.verb;
      sr.path = display.empty() ? "/" : display;

      if (const JsonValue* q = s.walk("query"); q != nullptr && q->is_object())
        for (const auto& field : q->fields())
          req.query.emplace_back(field.first,
                                 substitute_vars(field.second.to_display_string(), vars));
      if (const JsonValue* h = s.walk("headers"); h != nullptr && h->is_object())
        for (const auto& field : h->fields())
          req.headers.emplace_back(field.first,
                                   substitute_vars(field.second.to_display_string(), vars));

      if (const JsonValue* raw = s.walk("body-raw")) {
        req.body = raw->to_display_string();
      } else if (const JsonValue* body = s.walk("body")) {
        req.body = body->is_null() ? "null" : substitute_vars(body->to_display_string(), vars);
      }
      if (const JsonValue* ct = s.walk("content-type"))
        req.content_type = ct->to_display_string();
      else if (!req.body.empty())
        req.content_type = "application/json";

      HttpResponse resp = transport.send(req);
      sr.status = resp.status;
      JsonValue body;
      if (auto parsed = JsonValue::parse(resp.body))
        body = std::move(*parsed);
      else if (!resp.body.empty())
        body = JsonValue::string(resp.body);

      if (const JsonValue* ex = s.walk("extract"); ex != nullptr && ex->is_array())
        for (const JsonValue& e : ex->items()) {
          const JsonValue* var = e.walk("var");
          const JsonValue* from = e.walk("from");
          if (var == nullptr || from == nullptr) continue;
          if (const JsonValue* v = body.walk(from->to_display_string()))
            if (v->is_scalar() && !v->is_null())
              vars[var->to_display_string()] = v->to_display_string();
        }

      auto fail = [&](const std::string& note) {
        if (sr.passed) sr.note = note;
        sr.passed = false;
      };
      if (const JsonValue* expect = s.walk("expect"); expect != nullptr && expect->is_object()) {
        if (const JsonValue* status = expect->walk("status")) {
          const int want = to_int(*status);
          if (resp.status != want)
            fail("expected status " + std::to_string(want) + ", got " +
                 std::to_string(resp.status));
        }
        if (const JsonValue* family = expect->walk("status-family")) {
          const std::string want = family->to_display_string();
          const bool twoxx = resp.status >= 200 && resp.status <= 299;
          bool ok = false;
          if (want == "2xx-or-404")
            ok = twoxx || resp.status == 404;
          else if (want.size() == 3 && want[1] == 'x' && want[2] == 'x')
            ok = resp.status / 100 == want[0] - '0';
          if (!ok)
            fail("expected status family " + want + ", got " + std::to_string(resp.status));
        }
        if (const JsonValue* checks = expect->walk("body-checks");
            checks != nullptr && checks->is_array()) {
          for (const JsonValue& c : checks->items()) {
            const JsonValue* path = c.walk("path");
            const JsonValue* want = c.walk("instance-type");
            if (path == nullptr || want == nullptr) continue;
            std::string pointer = path->to_display_string();
            if (!pointer.empty() && pointer[0] == '/') pointer = pointer.substr(1);
            const JsonValue* at = body.walk(pointer);
            const std::string got = at == nullptr ? "missing" : instance_type_name(*at);
            if (got != want->to_display_string())
              fail("body " + path->to_display_string() + ": expected instance type " +
                   want->to_display_string() + ", got " + got);
          }
        }
      }

      report.steps_total++;
      if (sr.passed) report.steps_passed++;
      tr.passed &= sr.passed;
      tr.steps.push_back(std::move(sr));
    }
    report.all_passed &= tr.passed;
    report.tests.push_back(std::move(tr));
  }
  return report;
}

std::string render_replay_report(const ReplayReport& report) {
  std::ostringstream out;
  for (const auto& tr : report.tests) {
    out << (tr.passed ? "PASS" : "FAIL") << " " << tr.name << "\n";
    for (std::size_t i = 0; i < tr.steps.size(); ++i) {
      const auto& sr = tr.steps[i];
      if (sr.passed) continue;
      out << "  step " << i + 1 << " " << sr.verb << " " << sr.path << " -> " << sr.status
          << ": " << sr.note << "\n";
    }
  }
  out << "replayed " << report.tests.size() << " tests, " << report.steps_total << " steps, "
      << (report.steps_total - report.steps_passed) << " failed\n";
  return out.str();
}

}  // namespace apifuzz
