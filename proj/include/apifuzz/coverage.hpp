#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "apifuzz/api_model.hpp"
#include "apifuzz/test_case.hpp"
#include "apifuzz/util.hpp"

namespace apifuzz {

/// One black-box coverage target. Identity is the full tuple: the same
/// observable in any-status and success-2xx qualification is two targets.
struct CoverageTarget {
  enum class Kind {
    EndpointStatus,  // detail = status family "2xx" / "4xx" / "5xx"
    OptionalCombo,   // detail = presence mask over optional query params
    EnumValue,       // detail = parameter name, value = enum value display
    ExampleUsed,     // detail = slot ("query.name", "body/foo"), value = index
    LinkFollowed,    // detail = declared response status key, value = link name
    FaultFound,      // detail = fault code ("100", "101")
  };
  /// EndpointStatus and FaultFound already encode an outcome; only the other
  /// kinds exist in both qualifications.
  enum class Qualified { None, AnyStatus, Success2xx };

  Kind kind = Kind::EndpointStatus;
  Qualified qualified = Qualified::None;
  std::string endpoint;  // "<verb> <path>"
  std::string detail;
  std::string value;

  static CoverageTarget endpoint_status(std::string ep, std::string family);
  static CoverageTarget optional_combo(std::string ep, std::string mask, Qualified q);
  static CoverageTarget enum_value(std::string ep, std::string param, std::string display,
                                   Qualified q);
  static CoverageTarget example_used(std::string ep, std::string slot, std::size_t index,
                                     Qualified q);
  static CoverageTarget link_followed(std::string ep, std::string status_key, std::string link,
                                      Qualified q);
  static CoverageTarget fault_found(std::string ep, int code);

  auto tie() const { return std::tie(kind, qualified, endpoint, detail, value); }
  bool operator<(const CoverageTarget& o) const { return tie() < o.tie(); }
  bool operator==(const CoverageTarget& o) const { return tie() == o.tie(); }

  std::string describe() const;
};

/// Endpoint identity used in target tuples.
std::string endpoint_key(const EndpointSpec& endpoint);

/// "2xx"/"4xx"/"5xx" for statuses in those ranges, "" otherwise.
std::string status_family(int status);

/// Whether a declared response key ("200", "2XX", "default") matches a
/// concrete status.
bool status_key_matches(const std::string& key, int status);

/// Coverage archive: target universe plus the first (or strictly shorter
/// replacement) test evidencing each covered target.
struct Archive {
  struct ArchivedTest {
    TestCase test;
    std::vector<RecordedExchange> exchanges;  // what each action returned
    std::set<CoverageTarget> covers;          // every target the test evidenced
    Millis first_covered{0};
  };

  std::set<CoverageTarget> pending;
  std::vector<ArchivedTest> tests;
  std::map<CoverageTarget, std::size_t> covered;  // target -> index into tests
  std::map<CoverageTarget, Millis> covered_at;

  bool is_covered(const CoverageTarget& t) const { return covered.count(t) != 0; }
  bool all_covered() const { return pending.empty(); }
  std::size_t universe_size() const { return pending.size() + covered.size(); }
};

/// Enumerates the full target universe for a (filtered) model: per endpoint,
/// status families 2xx/4xx/5xx; every optional-query presence mask (capped,
/// see presence_masks); every enum value of every parameter; every declared
/// example; every declared link; fault classes 100 and 101. All but the
/// status-family and fault targets appear in both any-status and success-2xx
/// qualification.
std::set<CoverageTarget> derive_targets(const ApiModel& model);

/// Marks every universe target the execution evidences. Returns the targets
/// that were not covered before this call. An already-covered target keeps
/// its archived test unless this test is strictly shorter. Exchanges align
/// 1:1 with test actions.
std::set<CoverageTarget> record_execution(Archive& archive, const TestCase& test,
                                          const std::vector<RecordedExchange>& exchanges,
                                          Millis now = Millis{0});

/// Target set the execution evidences, independent of archive state.
std::set<CoverageTarget> evidenced_targets(const Archive& archive, const TestCase& test,
                                           const std::vector<RecordedExchange>& exchanges);

/// Deduplicated archived tests, greedily reduced: a test is dropped when the
/// union of the remaining tests' covered targets already contains its own.
/// The union of covered targets is invariant under the reduction. Output
/// order is deterministic (first action's path, then verb, then coverage).
std::vector<const Archive::ArchivedTest*> minimized_entries(const Archive& archive);
std::vector<TestCase> minimized_suite(const Archive& archive);

/// Human-readable per-endpoint table: targets total / covered / 2xx-covered.
std::string coverage_table(const Archive& archive);

/// Machine-readable summary of the same numbers.
std::string coverage_json(const Archive& archive);

}  // namespace apifuzz
