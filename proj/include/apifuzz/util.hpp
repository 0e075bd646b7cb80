#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace apifuzz {

/// Bad user-supplied configuration (flags, config files, empty endpoint
/// filter). Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fatal environment problem (unreachable target, unwritable output).
/// Maps to CLI exit code 3.
class EnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Login or token-extraction failure.
class AuthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Millis = std::chrono::milliseconds;

/// Parses "30s", "10m", "1h", "500ms" and bare millisecond counts.
/// Throws ConfigError on anything else.
Millis parse_duration(std::string_view text);

std::string to_lower(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Percent-encodes everything outside RFC 3986 unreserved characters.
std::string url_encode(std::string_view s);

/// "users" -> "user", "parties" -> "party"; already-singular words pass
/// through unchanged.
std::string singularize(std::string_view noun);

/// True when the two nouns match exactly or modulo the singular/plural
/// forms handled by singularize().
bool nouns_match(std::string_view a, std::string_view b);

/// lower-camel words -> PascalCase ("users" -> "Users").
std::string pascal_case(std::string_view word);

}  // namespace apifuzz
