#include "apifuzz/input_gen.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "apifuzz/util.hpp"

namespace apifuzz {

long long Rng::between(long long lo, long long hi) {
  if (lo >= hi) return lo;
  unsigned long long span = static_cast<unsigned long long>(hi - lo) + 1;
  return lo + static_cast<long long>(next() % span);
}

namespace {

constexpr double kNullableChance = 0.1;
constexpr const char* kSafeAlnum =
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

// ---------------------------------------------------------------------------
// Regex-walking generator

struct RegexNode {
  enum class Kind { Literal, Class, Seq, Alt, Repeat };
  Kind kind = Kind::Seq;
  std::string chars;  // Literal: the text; Class: expanded candidate set
  std::vector<RegexNode> kids;
  int min_rep = 1;
  int max_rep = 1;
};

class RegexParser {
 public:
  explicit RegexParser(std::string_view pattern) : pat_(pattern) {}

  std::optional<RegexNode> parse() {
    RegexNode root = parse_alt();
    if (unsupported_ || pos_ != pat_.size()) return std::nullopt;
    return root;
  }

 private:
  static constexpr int kUnboundedCap = 3;

  char peek() const { return pos_ < pat_.size() ? pat_[pos_] : '\0'; }
  char take() { return pos_ < pat_.size() ? pat_[pos_++] : '\0'; }
  bool done() const { return pos_ >= pat_.size(); }

  RegexNode parse_alt() {
    RegexNode alt;
    alt.kind = RegexNode::Kind::Alt;
    alt.kids.push_back(parse_seq());
    while (!done() && peek() == '|') {
      take();
      alt.kids.push_back(parse_seq());
    }
    if (alt.kids.size() == 1) return std::move(alt.kids[0]);
    return alt;
  }

  RegexNode parse_seq() {
    RegexNode seq;
    seq.kind = RegexNode::Kind::Seq;
    while (!done() && peek() != '|' && peek() != ')') {
      if (unsupported_) break;
      seq.kids.push_back(parse_repeat());
    }
    return seq;
  }

  RegexNode parse_repeat() {
    RegexNode atom = parse_atom();
    if (done()) return atom;
    int lo = 1, hi = 1;
    bool quantified = true;
    switch (peek()) {
      case '*': take(); lo = 0; hi = kUnboundedCap; break;
      case '+': take(); lo = 1; hi = kUnboundedCap; break;
      case '?': take(); lo = 0; hi = 1; break;
      case '{': {
        size_t close = pat_.find('}', pos_);
        if (close == std::string_view::npos) {
          quantified = false;
          break;
        }
        std::string body(pat_.substr(pos_ + 1, close - pos_ - 1));
        size_t comma = body.find(',');
        try {
          if (comma == std::string::npos) {
            lo = hi = std::stoi(body);
          } else {
            lo = std::stoi(body.substr(0, comma));
            std::string upper = trim(body.substr(comma + 1));
            hi = upper.empty() ? lo + kUnboundedCap - 1 : std::stoi(upper);
          }
        } catch (const std::exception&) {
          quantified = false;
          break;
        }
        pos_ = close + 1;
        break;
      }
      default: quantified = false;
    }
    if (!quantified) return atom;
    if (!done() && peek() == '?') take();  // lazy quantifiers generate the same
    RegexNode rep;
    rep.kind = RegexNode::Kind::Repeat;
    rep.min_rep = lo;
    rep.max_rep = std::max(lo, hi);
    rep.kids.push_back(std::move(atom));
    return rep;
  }

  RegexNode parse_atom() {
    char c = take();
    switch (c) {
      case '(': {
        if (peek() == '?') {
          take();
          if (peek() == ':') {
            take();
          } else {
            unsupported_ = true;  // lookaround, named groups, flags
            return {};
          }
        }
        RegexNode inner = parse_alt();
        if (take() != ')') unsupported_ = true;
        return inner;
      }
      case '[': return parse_class();
      case '\\': return escape_node(take());
      case '.': {
        RegexNode any;
        any.kind = RegexNode::Kind::Class;
        any.chars = kSafeAlnum;
        return any;
      }
      case '^':
      case '$': {
        RegexNode empty;  // anchors contribute no characters
        empty.kind = RegexNode::Kind::Literal;
        return empty;
      }
      default: {
        RegexNode lit;
        lit.kind = RegexNode::Kind::Literal;
        lit.chars = std::string(1, c);
        return lit;
      }
    }
  }

  RegexNode escape_node(char c) {
    RegexNode node;
    node.kind = RegexNode::Kind::Class;
    switch (c) {
      case 'd': node.chars = "0123456789"; return node;
      case 'w': node.chars = std::string(kSafeAlnum) + "_"; return node;
      case 's': node.chars = " "; return node;
      case 'D': node.chars = "abcXYZ_-"; return node;
      case 'W': node.chars = " -."; return node;
      case 'S': node.chars = kSafeAlnum; return node;
      case 'n': node.kind = RegexNode::Kind::Literal; node.chars = "\n"; return node;
      case 't': node.kind = RegexNode::Kind::Literal; node.chars = "\t"; return node;
      case 'r': node.kind = RegexNode::Kind::Literal; node.chars = "\r"; return node;
      default:
        if (c >= '1' && c <= '9') {
          unsupported_ = true;  // backreference
          return {};
        }
        node.kind = RegexNode::Kind::Literal;
        node.chars = std::string(1, c);
        return node;
    }
  }

  void add_class_char(std::string& set, char c) {
    if (set.find(c) == std::string::npos) set += c;
  }

  RegexNode parse_class() {
    RegexNode node;
    node.kind = RegexNode::Kind::Class;
    bool negated = false;
    if (peek() == '^') {
      take();
      negated = true;
    }
    std::string set;
    bool first = true;
    while (!done() && (peek() != ']' || first)) {
      first = false;
      char c = take();
      if (c == '\\') {
        RegexNode esc = escape_node(take());
        for (char e : esc.chars) add_class_char(set, e);
        continue;
      }
      if (peek() == '-' && pos_ + 1 < pat_.size() && pat_[pos_ + 1] != ']') {
        take();
        char hi = take();
        if (hi == '\\') hi = take();
        for (char r = c; r <= hi && r > 0; ++r) add_class_char(set, r);
        continue;
      }
      add_class_char(set, c);
    }
    if (take() != ']') {
      unsupported_ = true;
      return {};
    }
    if (negated) {
      std::string complement;
      for (const char* p = kSafeAlnum; *p; ++p)
        if (set.find(*p) == std::string::npos) complement += *p;
      if (complement.empty()) {
        unsupported_ = true;
        return {};
      }
      node.chars = complement;
    } else {
      node.chars = set;
    }
    if (node.chars.empty()) unsupported_ = true;
    return node;
  }

  std::string_view pat_;
  size_t pos_ = 0;
  bool unsupported_ = false;
};

void walk_regex(const RegexNode& node, Rng& rng, std::string& out) {
  switch (node.kind) {
    case RegexNode::Kind::Literal:
      out += node.chars;
      break;
    case RegexNode::Kind::Class:
      if (!node.chars.empty()) out += node.chars[rng.below(node.chars.size())];
      break;
    case RegexNode::Kind::Seq:
      for (const auto& kid : node.kids) walk_regex(kid, rng, out);
      break;
    case RegexNode::Kind::Alt:
      walk_regex(node.kids[rng.below(node.kids.size())], rng, out);
      break;
    case RegexNode::Kind::Repeat: {
      long long n = rng.between(node.min_rep, node.max_rep);
      for (long long i = 0; i < n; ++i) walk_regex(node.kids[0], rng, out);
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Value generation

class Generator {
 public:
  explicit Generator(GenContext& ctx) : ctx_(ctx) {}

  JsonValue gen(const ValueSchema& schema, const std::string& slot, int depth) {
    if (!schema.examples.empty() && ctx_.rng.chance(ctx_.cfg.example_probability)) {
      size_t idx = ctx_.rng.below(schema.examples.size());
      ctx_.used_examples.push_back({slot, idx});
      const JsonValue& example = schema.examples[idx];
      if (schema.type == ValueSchema::Type::Object && example.is_object())
        return complete(schema, example, slot, depth);
      return example;
    }
    return gen_fresh(schema, slot, depth);
  }

  JsonValue complete(const ValueSchema& schema, const JsonValue& partial, const std::string& slot,
                     int depth) {
    std::vector<JsonValue::Field> out;
    for (const auto& field : schema.fields) {
      if (const JsonValue* given = partial.get(field.name)) {
        out.emplace_back(field.name, *given);
      } else if (field.required) {
        out.emplace_back(field.name, gen(field.schema, child_slot(slot, field.name), depth + 1));
      } else {
        out.emplace_back(field.name, JsonValue::undefined());
      }
    }
    for (const auto& [name, value] : partial.fields()) {
      if (schema.field(name)) continue;
      warn(warning_code::kExtraExampleField,
           "example field '" + name + "' is not declared by the schema; kept as given");
      out.emplace_back(name, value);
    }
    return JsonValue::object(std::move(out));
  }

 private:
  static std::string child_slot(const std::string& slot, const std::string& name) {
    return slot.empty() ? name : slot + "/" + name;
  }

  void warn(const char* code, std::string message) {
    if (ctx_.warnings)
      ctx_.warnings->push_back({code, "", "", std::move(message), SchemaWarning::Severity::Warn});
  }

  JsonValue gen_fresh(const ValueSchema& schema, const std::string& slot, int depth) {
    if (!schema.enum_values.empty())
      return schema.enum_values[ctx_.rng.below(schema.enum_values.size())];
    if (schema.nullable && ctx_.rng.chance(kNullableChance)) return JsonValue::null();

    switch (schema.type) {
      case ValueSchema::Type::String: return gen_string(schema);
      case ValueSchema::Type::Integer: return gen_integer(schema);
      case ValueSchema::Type::Number: return gen_number(schema);
      case ValueSchema::Type::Boolean: return JsonValue::boolean(ctx_.rng.chance(0.5));
      case ValueSchema::Type::Array: return gen_array(schema, slot, depth);
      case ValueSchema::Type::Object: return gen_object(schema, slot, depth);
      case ValueSchema::Type::Composite: return gen_composite(schema, slot, depth);
    }
    return JsonValue::null();
  }

  std::string random_alnum(long long lo, long long hi) {
    long long n = ctx_.rng.between(lo, hi);
    std::string out;
    out.reserve(static_cast<size_t>(n));
    for (long long i = 0; i < n; ++i) out += kSafeAlnum[ctx_.rng.below(62)];
    return out;
  }

  JsonValue gen_string(const ValueSchema& schema) {
    if (schema.pattern) return JsonValue::string(gen_pattern_string(*schema.pattern));
    long long lo = schema.min_length.value_or(1);
    long long hi = schema.max_length.value_or(
        std::max<long long>(lo, ctx_.cfg.max_string_length));
    if (lo > hi) {
      warn(warning_code::kUnsatisfiableConstraints,
           "minLength " + std::to_string(lo) + " exceeds maxLength " + std::to_string(hi));
      hi = lo;
    }
    return JsonValue::string(random_alnum(lo, hi));
  }

  std::string gen_pattern_string(const std::string& pattern) {
    std::optional<std::regex> checker;
    try {
      checker.emplace(pattern, std::regex_constants::ECMAScript);
    } catch (const std::regex_error&) {
      checker.reset();
    }
    auto ast = RegexParser(pattern).parse();
    std::string last;
    for (int attempt = 0; attempt < 100; ++attempt) {
      std::string candidate;
      if (ast)
        walk_regex(*ast, ctx_.rng, candidate);
      else
        candidate = random_alnum(1, ctx_.cfg.max_string_length);
      last = candidate;
      if (!checker) {
        if (ast) return candidate;  // no oracle available: trust the walker
        continue;
      }
      if (std::regex_search(candidate, *checker)) return candidate;
    }
    warn(warning_code::kRegexFallback,
         "could not produce a string matching pattern '" + pattern + "'; using best effort");
    return last;
  }

  JsonValue gen_integer(const ValueSchema& schema) {
    long long lo = schema.minimum ? static_cast<long long>(std::ceil(*schema.minimum)) : -1000;
    long long hi = schema.maximum ? static_cast<long long>(std::floor(*schema.maximum)) : 1000;
    if (lo > hi) {
      warn(warning_code::kUnsatisfiableConstraints,
           "minimum exceeds maximum on integer schema");
      hi = lo;
    }
    return JsonValue::number(ctx_.rng.between(lo, hi));
  }

  JsonValue gen_number(const ValueSchema& schema) {
    double lo = schema.minimum.value_or(-1000.0);
    double hi = schema.maximum.value_or(1000.0);
    if (lo > hi) {
      warn(warning_code::kUnsatisfiableConstraints, "minimum exceeds maximum on number schema");
      hi = lo;
    }
    double v = lo + ctx_.rng.unit() * (hi - lo);
    v = std::round(v * 1000.0) / 1000.0;  // keep emitted plans readable
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    return JsonValue::number(v);
  }

  JsonValue gen_array(const ValueSchema& schema, const std::string& slot, int depth) {
    std::vector<JsonValue> items;
    if (schema.has_item() && depth < ctx_.cfg.max_object_depth) {
      long long n = ctx_.rng.between(0, ctx_.cfg.max_array_items);
      for (long long i = 0; i < n; ++i)
        items.push_back(gen(schema.item[0], slot, depth + 1));
    }
    return JsonValue::array(std::move(items));
  }

  JsonValue gen_object(const ValueSchema& schema, const std::string& slot, int depth) {
    std::vector<JsonValue::Field> fields;
    if (depth < ctx_.cfg.max_object_depth) {
      for (const auto& field : schema.fields) {
        if (field.required || ctx_.rng.chance(0.5))
          fields.emplace_back(field.name, gen(field.schema, child_slot(slot, field.name),
                                              depth + 1));
        else
          fields.emplace_back(field.name, JsonValue::undefined());
      }
    }
    return JsonValue::object(std::move(fields));
  }

  JsonValue gen_composite(const ValueSchema& schema, const std::string& slot, int depth) {
    if (schema.branches.empty()) return JsonValue::object({});
    if (schema.composite_kind == ValueSchema::CompositeKind::AllOf) {
      ValueSchema merged;
      merged.type = ValueSchema::Type::Object;
      bool any_object = false;
      for (const auto& branch : schema.branches) {
        if (branch.type != ValueSchema::Type::Object) continue;
        any_object = true;
        for (const auto& field : branch.fields) {
          auto existing = std::find_if(merged.fields.begin(), merged.fields.end(),
                                       [&](const SchemaField& f) { return f.name == field.name; });
          if (existing != merged.fields.end())
            *existing = field;  // later branches win
          else
            merged.fields.push_back(field);
        }
      }
      if (any_object) return gen(merged, slot, depth);
      return gen(schema.branches.back(), slot, depth);
    }
    const ValueSchema& branch = schema.branches[ctx_.rng.below(schema.branches.size())];
    return gen(branch, slot, depth);
  }

  GenContext& ctx_;
};

}  // namespace

JsonValue gen_value(const ValueSchema& schema, GenContext& ctx, const std::string& slot) {
  return Generator(ctx).gen(schema, slot, 0);
}

JsonValue complete_example_object(const ValueSchema& schema, const JsonValue& partial,
                                  GenContext& ctx, const std::string& slot) {
  return Generator(ctx).complete(schema, partial, slot, 0);
}

std::vector<std::string> presence_masks(std::size_t k) {
  std::vector<std::string> out;
  if (k <= 8) {
    for (std::size_t c = 0; c < (std::size_t{1} << k); ++c) {
      std::string mask(k, '0');
      for (std::size_t i = 0; i < k; ++i)
        if (c & (std::size_t{1} << i)) mask[i] = '1';
      out.push_back(std::move(mask));
    }
    return out;
  }
  out.emplace_back(k, '0');
  for (std::size_t i = 0; i < k; ++i) {
    std::string mask(k, '0');
    mask[i] = '1';
    out.push_back(std::move(mask));
  }
  for (std::size_t i = 0; i < k; ++i) {
    std::string mask(k, '1');
    mask[i] = '0';
    out.push_back(std::move(mask));
  }
  out.emplace_back(k, '1');
  return out;
}

std::vector<InputAssignment> enum_and_optional_combinations(const EndpointSpec& endpoint,
                                                            std::size_t cap) {
  std::vector<const ParamSpec*> optionals;
  for (const auto& p : endpoint.params)
    if (p.location == ParamLocation::Query && !p.required) optionals.push_back(&p);

  std::vector<std::string> masks;
  if (optionals.empty())
    masks.emplace_back("");
  else
    masks = presence_masks(optionals.size());

  struct Pin {
    std::string param;
    std::size_t index;
    JsonValue value;
  };
  std::vector<std::optional<Pin>> pins;
  for (const auto& p : endpoint.params)
    for (std::size_t i = 0; i < p.schema.enum_values.size(); ++i)
      pins.push_back(Pin{p.name, i, p.schema.enum_values[i]});
  if (pins.empty()) pins.push_back(std::nullopt);

  std::vector<InputAssignment> out;
  for (const auto& pin : pins) {
    for (const auto& mask : masks) {
      if (cap != 0 && out.size() >= cap) return out;
      InputAssignment a;
      a.presence_mask = mask;
      for (std::size_t i = 0; i < optionals.size(); ++i)
        a.presence.emplace_back(optionals[i]->name, mask[i] == '1');
      if (pin) {
        a.enum_param = pin->param;
        a.enum_index = pin->index;
        a.enum_value = pin->value;
      }
      out.push_back(std::move(a));
    }
  }
  return out;
}

std::optional<std::string> gen_from_regex(const std::string& pattern, Rng& rng) {
  auto ast = RegexParser(pattern).parse();
  if (!ast) return std::nullopt;
  std::string out;
  walk_regex(*ast, rng, out);
  return out;
}

}  // namespace apifuzz
