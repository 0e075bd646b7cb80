#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "apifuzz/json_value.hpp"

namespace apifuzz {

/// Parses YAML text into a JsonValue tree. Plain scalars get implicit typing
/// (true/false, integers, floats, null); quoted scalars stay strings.
std::optional<JsonValue> parse_yaml(const std::string& text, std::string* error = nullptr);

/// Parses a schema document that may be either JSON or YAML. JSON is detected
/// by the first significant character.
std::optional<JsonValue> parse_document(const std::string& text, std::string* error = nullptr);

}  // namespace apifuzz
