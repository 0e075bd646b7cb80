#include "apifuzz/warnings.hpp"

#include "apifuzz/json_value.hpp"

namespace apifuzz {

std::string render_warnings_text(const std::vector<SchemaWarning>& warnings) {
  std::string out;
  for (const auto& w : warnings) {
    out += w.severity == SchemaWarning::Severity::Info ? "info " : "warn ";
    out += w.code;
    out += " at ";
    out += w.document;
    if (!w.path.empty()) {
      out += "#/";
      out += w.path;
    }
    out += ": ";
    out += w.message;
    out += '\n';
  }
  return out;
}

std::string render_warnings_json(const std::vector<SchemaWarning>& warnings) {
  std::vector<JsonValue> entries;
  entries.reserve(warnings.size());
  for (const auto& w : warnings) {
    JsonValue e = JsonValue::object();
    e.set("code", JsonValue::string(w.code));
    e.set("document", JsonValue::string(w.document));
    e.set("path", JsonValue::string(w.path));
    e.set("message", JsonValue::string(w.message));
    e.set("severity",
          JsonValue::string(w.severity == SchemaWarning::Severity::Info ? "info" : "warn"));
    entries.push_back(std::move(e));
  }
  return JsonValue::array(std::move(entries)).dump();
}

}  // namespace apifuzz
