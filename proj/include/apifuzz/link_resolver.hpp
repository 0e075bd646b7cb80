#pragma once

#include <map>
#include <optional>
#include <string>

#include "apifuzz/api_model.hpp"
#include "apifuzz/input_gen.hpp"
#include "apifuzz/test_case.hpp"

namespace apifuzz {

/// "link_<sourceIndex>__<pointer with '/' replaced by '_'>".
std::string link_var_name(std::size_t source_index, const std::string& pointer);

/// Where a link binding lands on the target endpoint.
struct SlotRef {
  SlotKind kind = SlotKind::PathParam;
  std::string name;
};

/// Maps a link parameter designator onto the target endpoint. Accepts
/// "path.x" / "query.x" / "header.x" prefixes; a bare name is searched in
/// path, then query, then header parameters. Unknown names get nullopt.
std::optional<SlotRef> resolve_designator(const EndpointSpec& target,
                                          const std::string& designator);

/// Appends an action invoking the link's target operation to the test.
/// Constant bindings are inlined; response extractions become Binding rows
/// with ${var} placeholders in the new action's slots. Required target
/// parameters the link leaves unbound are generated from their schemas.
/// Returns the new action's index, or nullopt if the target operation is
/// missing from the model (a warning is recorded either way through ctx).
std::optional<std::size_t> expand_link(TestCase& test, std::size_t source_index,
                                       const LinkSpec& link, const ApiModel& model,
                                       GenContext& ctx);

/// Pulls the bound value out of a recorded response body. Missing pointer
/// segments or a non-scalar landing value yield nullopt: the link is broken
/// for this execution, not an error.
std::optional<std::string> evaluate_binding(const Binding& binding,
                                            const JsonValue& source_body);

/// True for strings of the exact shape "${name}".
bool is_var_ref(const JsonValue& v);
std::optional<std::string> var_ref_name(const JsonValue& v);

/// Replaces every ${name} occurrence found in vars; unknown names are left
/// verbatim so broken links surface in the request rather than vanish.
std::string substitute_vars(const std::string& text,
                            const std::map<std::string, std::string>& vars);

}  // namespace apifuzz
