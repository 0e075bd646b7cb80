#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "apifuzz/api_model.hpp"
#include "apifuzz/json_value.hpp"
#include "apifuzz/warnings.hpp"

namespace apifuzz {

struct GenConfig {
  std::uint64_t seed = 1;
  /// Chance of answering a slot from its declared examples when any exist.
  double example_probability = 0.5;
  /// Fallback bounds for unconstrained schemas. Kept small so requests and
  /// emitted plans stay readable.
  int max_string_length = 16;
  int max_array_items = 3;
  int max_object_depth = 6;
};

/// Deterministic random stream. All sampling goes through these helpers, so
/// the generated-value sequence depends only on the seed, not on standard
/// library distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, n); n = 0 returns 0.
  std::size_t below(std::size_t n) { return n == 0 ? 0 : next() % n; }
  /// Uniform in [lo, hi]; returns lo when the range is inverted.
  long long between(long long lo, long long hi);
  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1p-53; }
  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 engine_;
};

/// Records that a declared example answered a slot ("query.name", "body",
/// "body/foo", ...). Drives example-usage coverage targets.
struct GenEvent {
  std::string slot;
  std::size_t example_index;
};

struct GenContext {
  GenConfig cfg;
  Rng rng;
  std::vector<SchemaWarning>* warnings = nullptr;
  std::vector<GenEvent> used_examples;

  explicit GenContext(GenConfig config) : cfg(config), rng(config.seed) {}
};

/// Samples a value satisfying the schema's declared constraints. With
/// probability cfg.example_probability a declared example answers the slot
/// instead (object examples are completed, see complete_example_object).
/// Unsatisfiable constraints degrade to a warning plus a best-effort value.
JsonValue gen_value(const ValueSchema& schema, GenContext& ctx, const std::string& slot = {});

/// Fills an object example up to its schema: fields present in `partial` are
/// kept verbatim (their co-occurrence is never broken), absent required
/// fields are sampled, absent optional fields stay Undefined. Fields of
/// `partial` unknown to the schema are kept, with a warning.
JsonValue complete_example_object(const ValueSchema& schema, const JsonValue& partial,
                                  GenContext& ctx, const std::string& slot = {});

/// One directed input choice: which optional query parameters to include and
/// (optionally) one enum parameter pinned to one of its declared values.
struct InputAssignment {
  /// Optional query parameters in declared order with their on/off state.
  std::vector<std::pair<std::string, bool>> presence;
  /// Same information as a '0'/'1' string, usable as a target identity.
  std::string presence_mask;
  std::optional<std::string> enum_param;
  std::optional<std::size_t> enum_index;
  JsonValue enum_value;
};

/// Presence masks for k optional parameters. k <= 8 enumerates all 2^k masks
/// (ascending, mask[i] follows bit i). Beyond 8 the full product is replaced
/// by: all-off, each single-on, each single-off, all-on.
std::vector<std::string> presence_masks(std::size_t k);

/// Cross-product of presence masks and per-parameter enum sweeps, presence
/// varying fastest: for each enum pin (parameters in declared order, values
/// in declared order; a single no-pin entry when no enums exist) emit every
/// presence mask. Truncated at `cap` entries (0 = no cap). Deterministic.
std::vector<InputAssignment> enum_and_optional_combinations(const EndpointSpec& endpoint,
                                                            std::size_t cap);

/// Builds a string from a regex by walking its structure. Supports literals,
/// classes, ranges, escapes (\d \w \s and friends), groups, alternation and
/// bounded/unbounded quantifiers (unbounded repeats capped small). Returns
/// nullopt on constructs outside that subset (backreferences, lookaround).
std::optional<std::string> gen_from_regex(const std::string& pattern, Rng& rng);

}  // namespace apifuzz
