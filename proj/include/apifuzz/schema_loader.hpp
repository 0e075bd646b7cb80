#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "apifuzz/json_value.hpp"
#include "apifuzz/warnings.hpp"

namespace apifuzz {

/// Where a schema document lives. `Inherited` is only legal on a reference
/// (a protocol-less "//host/path" ref); the root must be concrete.
struct SchemaSource {
  enum class Protocol { File, Http, Https, Inherited };
  std::string location;
  Protocol protocol = Protocol::File;
};

/// Builds a source from a path or URL, inferring the protocol.
SchemaSource make_source(const std::string& location_or_url);

struct RefEdge {
  std::string from;  // canonical location of the referencing document
  std::string ref;   // the $ref string as written
  std::string to;    // canonical location of the referenced document
};

/// Resolved multi-document schema. Each canonical location appears exactly
/// once in `nodes` (fetched once); cycles are recorded as edges, never
/// re-fetched. Immutable after load and safe to share across threads.
struct SchemaGraph {
  std::map<std::string, JsonValue> nodes;
  std::vector<RefEdge> edges;
  std::string root;
  std::set<std::string> failed;  // referenced locations that could not be fetched or parsed

  const JsonValue* root_doc() const {
    auto it = nodes.find(root);
    return it == nodes.end() ? nullptr : &it->second;
  }
};

struct FetchOutcome {
  bool ok = false;
  std::string content;
  std::string error;
};

using Fetcher =
    std::function<FetchOutcome(SchemaSource::Protocol protocol, const std::string& canonical)>;

/// Reads files directly; fetches http(s) with a 10 s timeout and 2 retries.
Fetcher default_fetcher();

struct LoadOptions {
  Fetcher fetcher;  // empty -> default_fetcher()
};

/// Fetches the root and every transitively referenced external document,
/// each exactly once. Relative refs resolve against the referencing
/// document; protocol-less refs inherit its protocol. A broken reference
/// degrades to a warning plus a dangling marker. Throws ConfigError only
/// when the root itself is unreadable or unparseable.
std::pair<SchemaGraph, std::vector<SchemaWarning>> load_schema(const SchemaSource& root,
                                                               const LoadOptions& opts = {});

/// Total, idempotent structural validation: misplaced keys under
/// `responses`, example/type mismatches, links to unknown operationIds,
/// dangling $refs. Never throws.
std::vector<SchemaWarning> validate_schema(const SchemaGraph& graph);

/// Resolves a ref string against a referencing document, yielding the
/// canonical location of the target document plus the fragment (may be
/// empty). Exposed for the model builder.
struct ResolvedRef {
  SchemaSource source;   // canonical
  std::string fragment;  // without leading '#'
  bool external = false;
};
ResolvedRef resolve_ref(const SchemaSource& referencing_doc, const std::string& ref);

/// Canonical form: absolute path / normalized URL, fragment stripped.
std::string canonical_location(const SchemaSource& src);

/// Walks a JSON-pointer fragment ("/components/schemas/Foo", with ~0 / ~1
/// unescaping) inside one document. nullptr when missing.
const JsonValue* walk_fragment(const JsonValue& doc, std::string_view fragment);

}  // namespace apifuzz
