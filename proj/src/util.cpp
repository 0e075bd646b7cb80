#include "apifuzz/util.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace apifuzz {

Millis parse_duration(std::string_view text) {
  std::string t = trim(text);
  if (t.empty()) throw ConfigError("empty duration");
  size_t pos = 0;
  while (pos < t.size() && (std::isdigit(static_cast<unsigned char>(t[pos])) || t[pos] == '.'))
    ++pos;
  if (pos == 0) throw ConfigError("invalid duration: " + t);
  double amount = std::strtod(t.substr(0, pos).c_str(), nullptr);
  std::string unit = to_lower(t.substr(pos));
  double ms = 0;
  if (unit.empty() || unit == "ms")
    ms = amount;
  else if (unit == "s")
    ms = amount * 1000.0;
  else if (unit == "m")
    ms = amount * 60'000.0;
  else if (unit == "h")
    ms = amount * 3'600'000.0;
  else
    throw ConfigError("invalid duration unit '" + unit + "' in: " + t);
  return Millis(static_cast<long long>(ms));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(s.substr(start));
      break;
    }
    parts.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

std::string url_encode(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    }
  }
  return out;
}

std::string singularize(std::string_view noun) {
  std::string n(noun);
  if (ends_with(n, "ies") && n.size() > 3) return n.substr(0, n.size() - 3) + "y";
  if (ends_with(n, "ses") && n.size() > 3) return n.substr(0, n.size() - 2);
  if (ends_with(n, "s") && !ends_with(n, "ss") && n.size() > 1) return n.substr(0, n.size() - 1);
  return n;
}

bool nouns_match(std::string_view a, std::string_view b) {
  if (a == b) return true;
  return singularize(a) == singularize(b);
}

std::string pascal_case(std::string_view word) {
  std::string out;
  bool upper_next = true;
  for (char c : word) {
    if (c == '-' || c == '_' || c == ' ') {
      upper_next = true;
      continue;
    }
    out += upper_next ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;
    upper_next = false;
  }
  return out;
}

}  // namespace apifuzz
