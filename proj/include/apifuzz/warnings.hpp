#pragma once

#include <string>
#include <vector>

namespace apifuzz {

/// A non-fatal finding from schema loading, validation or model building.
/// Warnings never abort a run; the caller always gets a usable result.
struct SchemaWarning {
  enum class Severity { Info, Warn };

  std::string code;      // stable identifier, e.g. "misplaced-links"
  std::string document;  // canonical location of the offending document
  std::string path;      // path within the document, slash separated
  std::string message;
  Severity severity = Severity::Warn;
};

namespace warning_code {
inline constexpr const char* kMisplacedLinks = "misplaced-links";
inline constexpr const char* kMisplacedKey = "misplaced-key";
inline constexpr const char* kExampleTypeMismatch = "example-type-mismatch";
inline constexpr const char* kLinkUnknownOperation = "link-unknown-operation";
inline constexpr const char* kDanglingRef = "dangling-ref";
inline constexpr const char* kRefFetchFailed = "ref-fetch-failed";
inline constexpr const char* kUnknownVersion = "unknown-openapi-version";
inline constexpr const char* kLinkDropped = "link-dropped";
inline constexpr const char* kPathParamUndeclared = "path-param-undeclared";
inline constexpr const char* kUnsupportedExpression = "unsupported-runtime-expression";
inline constexpr const char* kUnsatisfiableConstraints = "unsatisfiable-constraints";
inline constexpr const char* kRegexFallback = "regex-generation-fallback";
inline constexpr const char* kExtraExampleField = "example-extra-field";
inline constexpr const char* kLinkUnknownParam = "link-unknown-parameter";
}  // namespace warning_code

/// One line per warning: "<severity> <code> at <document>#<path>: <message>".
std::string render_warnings_text(const std::vector<SchemaWarning>& warnings);

/// Machine-readable JSON list.
std::string render_warnings_json(const std::vector<SchemaWarning>& warnings);

}  // namespace apifuzz
