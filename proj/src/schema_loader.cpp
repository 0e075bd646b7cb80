#include "apifuzz/schema_loader.hpp"

#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "apifuzz/util.hpp"
#include "apifuzz/yaml_io.hpp"

namespace fs = std::filesystem;

namespace apifuzz {

namespace {

struct UrlParts {
  std::string scheme;
  std::string host;  // includes :port when present
  std::string path;  // always starts with '/'
};

bool parse_url(std::string_view url, UrlParts& out) {
  size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) return false;
  out.scheme = std::string(url.substr(0, scheme_end));
  std::string_view rest = url.substr(scheme_end + 3);
  size_t slash = rest.find('/');
  if (slash == std::string_view::npos) {
    out.host = std::string(rest);
    out.path = "/";
  } else {
    out.host = std::string(rest.substr(0, slash));
    out.path = std::string(rest.substr(slash));
  }
  return true;
}

std::string normalize_url_path(std::string_view path) {
  std::vector<std::string> stack;
  for (const auto& seg : split(path, '/')) {
    if (seg.empty() || seg == ".") continue;
    if (seg == "..") {
      if (!stack.empty()) stack.pop_back();
      continue;
    }
    stack.push_back(seg);
  }
  std::string out;
  for (const auto& seg : stack) {
    out += '/';
    out += seg;
  }
  return out.empty() ? "/" : out;
}

std::string strip_fragment(std::string_view location) {
  size_t hash = location.find('#');
  return std::string(hash == std::string_view::npos ? location : location.substr(0, hash));
}

std::string scheme_of(SchemaSource::Protocol p) {
  switch (p) {
    case SchemaSource::Protocol::Http: return "http";
    case SchemaSource::Protocol::Https: return "https";
    case SchemaSource::Protocol::File: return "file";
    case SchemaSource::Protocol::Inherited: return "";
  }
  return "";
}

FetchOutcome fetch_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {false, "", "cannot read file: " + path};
  std::ostringstream buf;
  buf << in.rdbuf();
  return {true, buf.str(), ""};
}

FetchOutcome fetch_http(SchemaSource::Protocol protocol, const std::string& canonical) {
  UrlParts parts;
  if (!parse_url(canonical, parts)) return {false, "", "malformed URL: " + canonical};
  httplib::Client client(scheme_of(protocol) + "://" + parts.host);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(10, 0);
  std::string last_error;
  for (int attempt = 0; attempt < 3; ++attempt) {  // initial try + 2 retries
    auto res = client.Get(parts.path);
    if (res && res->status >= 200 && res->status < 300) return {true, res->body, ""};
    last_error = res ? "HTTP status " + std::to_string(res->status)
                     : "transport error: " + httplib::to_string(res.error());
  }
  return {false, "", last_error + " fetching " + canonical};
}

void collect_refs(const JsonValue& node, std::vector<std::string>& out) {
  if (node.is_object()) {
    if (const JsonValue* ref = node.get("$ref"); ref && ref->is_string())
      out.push_back(ref->as_string());
    for (const auto& [name, value] : node.fields()) collect_refs(value, out);
  } else if (node.is_array()) {
    for (const auto& item : node.items()) collect_refs(item, out);
  }
}

}  // namespace

SchemaSource make_source(const std::string& location_or_url) {
  SchemaSource src;
  src.location = location_or_url;
  if (starts_with(location_or_url, "http://"))
    src.protocol = SchemaSource::Protocol::Http;
  else if (starts_with(location_or_url, "https://"))
    src.protocol = SchemaSource::Protocol::Https;
  else
    src.protocol = SchemaSource::Protocol::File;
  return src;
}

std::string canonical_location(const SchemaSource& src) {
  std::string loc = strip_fragment(src.location);
  if (src.protocol == SchemaSource::Protocol::File) {
    fs::path p(loc);
    if (!p.is_absolute()) p = fs::absolute(p);
    return p.lexically_normal().string();
  }
  UrlParts parts;
  if (!parse_url(loc, parts)) return loc;
  return parts.scheme + "://" + parts.host + normalize_url_path(parts.path);
}

ResolvedRef resolve_ref(const SchemaSource& referencing_doc, const std::string& ref) {
  ResolvedRef out;
  size_t hash = ref.find('#');
  std::string loc = hash == std::string::npos ? ref : ref.substr(0, hash);
  out.fragment = hash == std::string::npos ? "" : ref.substr(hash + 1);

  if (loc.empty()) {
    out.source = referencing_doc;
    out.source.location = canonical_location(referencing_doc);
    out.external = false;
    return out;
  }
  out.external = true;

  SchemaSource target;
  if (starts_with(loc, "http://")) {
    target = {loc, SchemaSource::Protocol::Http};
  } else if (starts_with(loc, "https://")) {
    target = {loc, SchemaSource::Protocol::Https};
  } else if (starts_with(loc, "//")) {
    // Protocol-less: inherit the referencing document's protocol.
    target.protocol = referencing_doc.protocol;
    target.location = scheme_of(referencing_doc.protocol) + ":" + loc;
  } else if (referencing_doc.protocol == SchemaSource::Protocol::File) {
    target.protocol = SchemaSource::Protocol::File;
    fs::path base(canonical_location(referencing_doc));
    target.location =
        starts_with(loc, "/") ? loc : (base.parent_path() / loc).lexically_normal().string();
  } else {
    target.protocol = referencing_doc.protocol;
    UrlParts base;
    parse_url(canonical_location(referencing_doc), base);
    std::string path;
    if (starts_with(loc, "/")) {
      path = loc;
    } else {
      size_t dir_end = base.path.rfind('/');
      path = base.path.substr(0, dir_end + 1) + loc;
    }
    target.location = base.scheme + "://" + base.host + normalize_url_path(path);
  }
  target.location = canonical_location(target);
  out.source = target;
  return out;
}

Fetcher default_fetcher() {
  return [](SchemaSource::Protocol protocol, const std::string& canonical) -> FetchOutcome {
    if (protocol == SchemaSource::Protocol::File) return fetch_file(canonical);
    return fetch_http(protocol, canonical);
  };
}

std::pair<SchemaGraph, std::vector<SchemaWarning>> load_schema(const SchemaSource& root,
                                                               const LoadOptions& opts) {
  if (root.protocol == SchemaSource::Protocol::Inherited)
    throw ConfigError("root schema source cannot use an inherited protocol");
  Fetcher fetch = opts.fetcher ? opts.fetcher : default_fetcher();

  SchemaGraph graph;
  std::vector<SchemaWarning> warnings;

  SchemaSource root_src = root;
  root_src.location = canonical_location(root);
  graph.root = root_src.location;

  std::deque<SchemaSource> queue{root_src};
  std::set<std::string> seen{root_src.location};
  std::set<std::tuple<std::string, std::string, std::string>> edge_set;

  while (!queue.empty()) {
    SchemaSource src = queue.front();
    queue.pop_front();
    const std::string& canon = src.location;

    FetchOutcome outcome = fetch(src.protocol, canon);
    if (!outcome.ok) {
      if (canon == graph.root) throw ConfigError("root schema unreadable: " + outcome.error);
      graph.failed.insert(canon);
      warnings.push_back({warning_code::kRefFetchFailed, canon, "",
                          "referenced document could not be fetched: " + outcome.error,
                          SchemaWarning::Severity::Warn});
      continue;
    }
    std::string parse_error;
    auto doc = parse_document(outcome.content, &parse_error);
    if (!doc) {
      if (canon == graph.root) throw ConfigError("root schema unparseable: " + parse_error);
      graph.failed.insert(canon);
      warnings.push_back({warning_code::kRefFetchFailed, canon, "",
                          "referenced document does not parse: " + parse_error,
                          SchemaWarning::Severity::Warn});
      continue;
    }
    graph.nodes.emplace(canon, std::move(*doc));

    std::vector<std::string> refs;
    collect_refs(graph.nodes.at(canon), refs);
    for (const auto& ref : refs) {
      ResolvedRef resolved = resolve_ref(src, ref);
      if (!resolved.external) continue;
      if (edge_set.emplace(canon, ref, resolved.source.location).second)
        graph.edges.push_back({canon, ref, resolved.source.location});
      if (seen.insert(resolved.source.location).second) queue.push_back(resolved.source);
    }
  }
  return {std::move(graph), std::move(warnings)};
}

const JsonValue* walk_fragment(const JsonValue& doc, std::string_view fragment) {
  std::string_view frag = fragment;
  while (!frag.empty() && frag.front() == '/') frag.remove_prefix(1);
  const JsonValue* cur = &doc;
  if (frag.empty()) return cur;
  for (auto& seg : split(frag, '/')) {
    // JSON-pointer unescaping.
    std::string name;
    for (size_t i = 0; i < seg.size(); ++i) {
      if (seg[i] == '~' && i + 1 < seg.size()) {
        name += seg[i + 1] == '1' ? '/' : (seg[i + 1] == '0' ? '~' : seg[i + 1]);
        ++i;
      } else {
        name += seg[i];
      }
    }
    if (cur->is_object()) {
      cur = cur->get(name);
    } else if (cur->is_array()) {
      char* end = nullptr;
      long idx = std::strtol(name.c_str(), &end, 10);
      if (end == name.c_str() || *end != '\0' || idx < 0 ||
          static_cast<size_t>(idx) >= cur->items().size())
        return nullptr;
      cur = &cur->items()[static_cast<size_t>(idx)];
    } else {
      return nullptr;
    }
    if (!cur) return nullptr;
  }
  return cur;
}

namespace {

const char* const kVerbs[] = {"get", "put", "post", "delete", "options", "head", "patch", "trace"};

bool is_status_key(const std::string& key) {
  if (key == "default") return true;
  if (key.size() != 3) return false;
  if (!std::isdigit(static_cast<unsigned char>(key[0]))) return false;
  for (size_t i = 1; i < 3; ++i) {
    char c = key[i];
    if (!std::isdigit(static_cast<unsigned char>(c)) && c != 'X' && c != 'x') return false;
  }
  return true;
}

bool value_matches_type(const JsonValue& v, const std::string& type, bool nullable) {
  if (v.is_null()) return nullable;
  if (type == "string") return v.is_string();
  if (type == "integer") return v.is_number() && v.as_int().has_value();
  if (type == "number") return v.is_number();
  if (type == "boolean") return v.is_bool();
  if (type == "array") return v.is_array();
  if (type == "object") return v.is_object();
  return true;  // unknown declared type: lenient
}

std::string short_json(const JsonValue& v) {
  std::string s = v.is_undefined() ? "undefined" : v.dump();
  if (s.size() > 60) s = s.substr(0, 57) + "...";
  return s;
}

class Validator {
 public:
  Validator(const SchemaGraph& graph, std::vector<SchemaWarning>& out)
      : graph_(graph), warnings_(out) {}

  void run() {
    collect_operation_ids();
    for (const auto& [canon, doc] : graph_.nodes) {
      check_version(canon, doc);
      check_paths(canon, doc);
      check_examples(canon, doc, "");
      check_component_links(canon, doc);
      check_refs(canon, doc, "");
    }
  }

 private:
  void warn(const char* code, const std::string& doc, const std::string& path, std::string message,
            SchemaWarning::Severity sev = SchemaWarning::Severity::Warn) {
    warnings_.push_back({code, doc, path, std::move(message), sev});
  }

  void collect_operation_ids() {
    for (const auto& [canon, doc] : graph_.nodes) {
      const JsonValue* paths = doc.get("paths");
      if (!paths || !paths->is_object()) continue;
      for (const auto& [path, item] : paths->fields()) {
        if (!item.is_object()) continue;
        for (const char* verb : kVerbs) {
          const JsonValue* op = item.get(verb);
          if (!op || !op->is_object()) continue;
          if (const JsonValue* id = op->get("operationId"); id && id->is_string())
            operation_ids_.insert(id->as_string());
        }
      }
    }
  }

  void check_version(const std::string& canon, const JsonValue& doc) {
    if (canon != graph_.root || !doc.is_object()) return;
    if (const JsonValue* v = doc.get("openapi"); v && v->is_string()) {
      if (starts_with(v->as_string(), "3.")) return;
      warn(warning_code::kUnknownVersion, canon, "openapi",
           "unsupported OpenAPI version '" + v->as_string() + "', continuing best-effort",
           SchemaWarning::Severity::Info);
      return;
    }
    if (const JsonValue* v = doc.get("swagger"); v && v->is_string()) {
      warn(warning_code::kUnknownVersion, canon, "swagger",
           "Swagger " + v->as_string() + " document, continuing best-effort",
           SchemaWarning::Severity::Info);
      return;
    }
    warn(warning_code::kUnknownVersion, canon, "",
         "document declares no OpenAPI version, continuing best-effort",
         SchemaWarning::Severity::Info);
  }

  void check_paths(const std::string& canon, const JsonValue& doc) {
    const JsonValue* paths = doc.is_object() ? doc.get("paths") : nullptr;
    if (!paths || !paths->is_object()) return;
    for (const auto& [path, item] : paths->fields()) {
      if (!item.is_object()) continue;
      for (const char* verb : kVerbs) {
        const JsonValue* op = item.get(verb);
        if (!op || !op->is_object()) continue;
        std::string op_path = "paths/" + path + "/" + verb;
        const JsonValue* responses = op->get("responses");
        if (!responses || !responses->is_object()) continue;
        for (const auto& [status, response] : responses->fields()) {
          std::string loc = op_path + "/responses/" + status;
          if (!is_status_key(status)) {
            if (status == "links")
              warn(warning_code::kMisplacedLinks, canon, loc,
                   "'links' is defined directly under 'responses' instead of under a status "
                   "code; it will be ignored unless moved");
            else
              warn(warning_code::kMisplacedKey, canon, loc,
                   "'" + status + "' is not a status code; this entry will be ignored");
            continue;
          }
          check_response_links(canon, loc, response);
        }
      }
    }
  }

  void check_response_links(const std::string& canon, const std::string& loc,
                            const JsonValue& response) {
    if (!response.is_object()) return;
    const JsonValue* links = response.get("links");
    if (!links || !links->is_object()) return;
    for (const auto& [name, link] : links->fields()) {
      if (!link.is_object()) continue;
      const JsonValue* op_id = link.get("operationId");
      if (op_id && op_id->is_string() && !operation_ids_.count(op_id->as_string()))
        warn(warning_code::kLinkUnknownOperation, canon, loc + "/links/" + name,
             "link targets unknown operationId '" + op_id->as_string() + "'");
    }
  }

  void check_component_links(const std::string& canon, const JsonValue& doc) {
    const JsonValue* components = doc.is_object() ? doc.get("components") : nullptr;
    const JsonValue* links = components && components->is_object() ? components->get("links") : nullptr;
    if (!links || !links->is_object()) return;
    for (const auto& [name, link] : links->fields()) {
      if (!link.is_object()) continue;
      const JsonValue* op_id = link.get("operationId");
      if (op_id && op_id->is_string() && !operation_ids_.count(op_id->as_string()))
        warn(warning_code::kLinkUnknownOperation, canon, "components/links/" + name,
             "link targets unknown operationId '" + op_id->as_string() + "'");
    }
  }

  void check_example_against(const std::string& canon, const std::string& loc,
                             const std::string& type, bool nullable, const JsonValue& example) {
    if (!value_matches_type(example, type, nullable))
      warn(warning_code::kExampleTypeMismatch, canon, loc,
           "example " + short_json(example) + " does not match declared type '" + type + "'");
  }

  void check_examples_entry(const std::string& canon, const std::string& loc,
                            const std::string& type, bool nullable, const JsonValue& examples) {
    if (examples.is_array()) {
      for (size_t i = 0; i < examples.items().size(); ++i)
        check_example_against(canon, loc + "/examples/" + std::to_string(i), type, nullable,
                              examples.items()[i]);
    } else if (examples.is_object()) {
      // Map form: keys are labels; Example Objects carry the value in "value".
      for (const auto& [key, entry] : examples.fields()) {
        const JsonValue* v = entry.is_object() && entry.has("value") ? entry.get("value") : &entry;
        check_example_against(canon, loc + "/examples/" + key, type, nullable, *v);
      }
    }
  }

  void check_examples(const std::string& canon, const JsonValue& node, const std::string& loc) {
    if (node.is_object()) {
      const JsonValue* type = node.get("type");
      const JsonValue* nullable = node.get("nullable");
      bool is_nullable = nullable && nullable->is_bool() && nullable->as_bool();
      if (type && type->is_string()) {
        if (const JsonValue* ex = node.get("example"))
          check_example_against(canon, loc + "/example", type->as_string(), is_nullable, *ex);
        if (const JsonValue* exs = node.get("examples"))
          check_examples_entry(canon, loc, type->as_string(), is_nullable, *exs);
      } else if (const JsonValue* schema = node.get("schema");
                 schema && schema->is_object() && schema->get("type") &&
                 schema->get("type")->is_string()) {
        const JsonValue* sn = schema->get("nullable");
        bool schema_nullable = sn && sn->is_bool() && sn->as_bool();
        if (const JsonValue* ex = node.get("example"))
          check_example_against(canon, loc + "/example", schema->get("type")->as_string(),
                                schema_nullable, *ex);
        if (const JsonValue* exs = node.get("examples"))
          check_examples_entry(canon, loc, schema->get("type")->as_string(), schema_nullable,
                               *exs);
      }
      for (const auto& [name, value] : node.fields()) {
        if (name == "example" || name == "examples") continue;
        check_examples(canon, value, loc.empty() ? name : loc + "/" + name);
      }
    } else if (node.is_array()) {
      for (size_t i = 0; i < node.items().size(); ++i)
        check_examples(canon, node.items()[i], loc + "/" + std::to_string(i));
    }
  }

  void check_refs(const std::string& canon, const JsonValue& node, const std::string& loc) {
    if (node.is_object()) {
      if (const JsonValue* ref = node.get("$ref"); ref && ref->is_string()) {
        SchemaSource src = make_source(canon);
        // Canonical file locations lose their protocol hint; restore it.
        if (!starts_with(canon, "http://") && !starts_with(canon, "https://"))
          src.protocol = SchemaSource::Protocol::File;
        ResolvedRef resolved = resolve_ref(src, ref->as_string());
        auto it = graph_.nodes.find(resolved.source.location);
        if (it == graph_.nodes.end()) {
          warn(warning_code::kDanglingRef, canon, loc,
               "$ref '" + ref->as_string() + "' points to an unavailable document");
        } else if (!resolved.fragment.empty() &&
                   walk_fragment(it->second, resolved.fragment) == nullptr) {
          warn(warning_code::kDanglingRef, canon, loc,
               "$ref '" + ref->as_string() + "' does not resolve within its target document");
        }
      }
      for (const auto& [name, value] : node.fields())
        check_refs(canon, value, loc.empty() ? name : loc + "/" + name);
    } else if (node.is_array()) {
      for (size_t i = 0; i < node.items().size(); ++i)
        check_refs(canon, node.items()[i], loc + "/" + std::to_string(i));
    }
  }

  const SchemaGraph& graph_;
  std::vector<SchemaWarning>& warnings_;
  std::set<std::string> operation_ids_;
};

}  // namespace

std::vector<SchemaWarning> validate_schema(const SchemaGraph& graph) {
  std::vector<SchemaWarning> warnings;
  Validator(graph, warnings).run();
  return warnings;
}

}  // namespace apifuzz
