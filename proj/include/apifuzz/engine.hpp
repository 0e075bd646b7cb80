#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "apifuzz/api_model.hpp"
#include "apifuzz/auth.hpp"
#include "apifuzz/coverage.hpp"
#include "apifuzz/http.hpp"
#include "apifuzz/input_gen.hpp"
#include "apifuzz/transforms.hpp"

namespace apifuzz {

struct SessionConfig {
  Millis max_time{60000};
  /// Stop when no target was newly covered for this long.
  std::optional<Millis> premature_stop;
  std::optional<int> rate_per_minute;
  std::uint64_t seed = 1;
  std::string base_url;
  bool cleanup = true;
  bool dictionary = true;
  GenConfig gen;  // seed field is overridden by `seed`
  std::vector<DerivedParamRule> derived_rules;
  /// Static headers attached to every non-login request.
  std::vector<std::pair<std::string, std::string>> extra_headers;
};

/// Throws ConfigError on an inconsistent config (premature-stop > max-time,
/// rate below 1).
void validate_session_config(const SessionConfig& cfg);

/// Milliseconds to sleep before the next request: max(0, 60000/N - X).
Millis throttle(int rate_per_minute, Millis last_request_duration);

/// Ids harvested from collection GET responses. Only ever feeds read (GET)
/// actions; DELETE/PUT/PATCH never see these values.
struct ResponseDictionary {
  struct Provenance {
    std::string endpoint;    // "<verb> <path>" that produced the id
    std::string extraction;  // field the id came from
    Millis harvested_at{0};
  };

  std::map<std::string, std::vector<std::string>> entries;  // path template -> ids
  std::map<std::string, Provenance> provenance;             // id -> origin

  void add(const std::string& path_template, const std::string& id, Provenance origin);
  const std::vector<std::string>* ids_for(const std::string& path_template) const;
  bool contains_id(const std::string& id) const { return provenance.count(id) != 0; }
};

/// GET without path parameters whose 2xx response is an array of objects or
/// an object wrapping exactly one array field.
bool collection_shaped(const EndpointSpec& endpoint);

/// Best-effort id harvesting from one executed collection GET. Ids land
/// under every `{id}`-templated sibling path (exact or singular/plural
/// variant of the collection segment). `exclude_ids` keeps ids the running
/// test created itself out of the dictionary: harvested state must predate
/// the test, or cleanup deletes would tear dictionary entries down.
void harvest_dictionary(ResponseDictionary& dict, const EndpointSpec& endpoint,
                        const RecordedExchange& exchange, const ApiModel& model, Millis now,
                        const std::set<std::string>* exclude_ids = nullptr);

/// Ids the executed test created: id-shaped fields of 2xx POST/PUT response
/// bodies plus client-chosen ids from their request bodies.
std::set<std::string> created_ids(const TestCase& test,
                                  const std::vector<RecordedExchange>& exchanges);

/// Appends a DELETE for each successful creation in the executed test:
/// POST, or PUT that returned 201. The DELETE endpoint is matched exact-path
/// -plus-`/{id}` first, then singular/plural tolerant (POST /users ->
/// DELETE /user/{id}). The created id binds via response extraction when the
/// response carries one, else the request's client-chosen id. Appended
/// actions expect 2xx-or-404 and never target dictionary-harvested ids.
/// Returns the indices of the appended actions.
std::vector<std::size_t> plan_cleanup(TestCase& test,
                                      const std::vector<RecordedExchange>& exchanges,
                                      const ApiModel& model, GenContext& ctx,
                                      const ResponseDictionary* dict);

/// One issued HTTP request, in send order.
struct ActionRecord {
  std::string verb;
  std::string path;  // concrete path, variables substituted
  int status = 0;
  bool dictionary_sourced = false;
  bool is_login = false;
  bool is_cleanup = false;
  Millis sent_at{0};
  Millis duration{0};
};

/// Deterministic rendering of the action log; the determinism oracle
/// byte-compares this.
std::string render_action_log(const std::vector<ActionRecord>& log);

struct SessionStats {
  std::string stop_reason;  // "budget" | "premature" | "all-covered"
  std::size_t tests_executed = 0;
  std::size_t requests_issued = 0;
  std::vector<ActionRecord> action_log;
  /// Throttle sleeps taken before request k+1 (one entry per non-first
  /// request when rate limiting is on).
  std::vector<Millis> waits;
  ResponseDictionary dictionary;  // final state, for oracles
  Millis started{0};
  Millis finished{0};
};

/// The fuzzing loop: pick an uncovered target, synthesize a test aimed at
/// it, execute, record coverage, plan cleanup, harvest ids; repeat until the
/// budget elapses, every target is covered, or no new coverage arrives
/// within premature-stop. Aborts with EnvironmentError after 30 consecutive
/// network failures. Generation order is deterministic for a fixed seed.
std::pair<Archive, SessionStats> run_session(const ApiModel& model, const AuthSpec* auth,
                                             std::set<CoverageTarget> targets,
                                             const SessionConfig& cfg, HttpTransport& transport,
                                             Clock& clock,
                                             const TransformRegistry* registry = nullptr);

}  // namespace apifuzz
