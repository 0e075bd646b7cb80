#pragma once

#include <optional>
#include <string>
#include <vector>

#include "apifuzz/coverage.hpp"
#include "apifuzz/http.hpp"
#include "apifuzz/test_case.hpp"

namespace apifuzz {

/// A contract deviation found in one exchange. Code 100 is the server-error
/// class (any 5xx); code 101 is a response that does not match its declared
/// schema, localized to a JSON pointer inside the body.
struct FaultInfo {
  int code = 0;
  std::string type_key;  // "validation.response.body.schema.type", ...
  std::string pointer;   // body location, "" = whole body
  std::string message;   // full human-readable fault line
  /// For type mismatches: observed instance type and the allowed primitive
  /// type names, kept so emitted plans can re-check the fault on replay.
  std::string instance_type;
  std::vector<std::string> allowed;
};

/// Classifies one exchange against the action's declared responses. 5xx is
/// a 100-class fault. A 2xx body violating its declared schema (wrong type,
/// missing required property) or a 2xx status the schema never declares is
/// a 101-class fault. 4xx responses are never faults: rejecting bad input
/// is correct behavior.
std::optional<FaultInfo> classify_fault(const HttpAction& action, const RecordedExchange& ex);

/// "test_<index>_<verbPhrase>". The phrase names the fault-bearing action
/// when one exists, else the last main action: verb, "On", the path noun
/// (singularized only when parameter segments follow it), then either
/// "ReturnsMismatchResponseWithSchema" (schema-mismatch faults) or
/// "Returns<status>".
std::string name_test(std::size_t index, const TestCase& test,
                      const std::vector<RecordedExchange>& exchanges);

/// Human-readable digest: numbered call lines "(status) VERB:path-template"
/// (login steps excluded), fault totals per type-code, followed links as
/// "declared-status:link-name", and used examples as "slot[index]". Empty
/// sections are omitted.
std::string summarize(const TestCase& test, const std::vector<RecordedExchange>& exchanges);

/// One emitted test: an archived test plus everything derived for output.
struct TestPlan {
  std::string name;
  std::string summary;
  TestCase test;
  std::vector<RecordedExchange> exchanges;
  std::vector<std::optional<FaultInfo>> faults;  // per action, aligned
};

/// Builds plans from minimized archive entries, in their given order.
std::vector<TestPlan> make_plans(const std::vector<const Archive::ArchivedTest*>& entries);

enum class EmitFormat { PlanYaml, CurlScript };

/// Self-contained YAML suite. Dynamic values stay symbolic: extraction
/// steps plus ${var} references, never frozen literals. Byte-deterministic
/// for identical plans.
std::string render_suite_yaml(const std::vector<TestPlan>& plans);

/// Same tests as a bash + curl script. Extractions shell out to python3 for
/// JSON field access; ${var} references double as shell variables.
std::string render_curl_script(const std::vector<TestPlan>& plans);

/// Writes suite.yaml or suite.sh under out_dir and returns the file path.
/// Throws EnvironmentError when the directory cannot be written.
std::string emit_suite(const std::vector<TestPlan>& plans, const std::string& out_dir,
                       EmitFormat format);

struct ReplayReport {
  struct StepResult {
    std::string verb;
    std::string path;  // concrete path after variable substitution
    int status = 0;
    bool passed = true;
    std::string note;  // first failed expectation, empty when passed
  };
  struct TestResult {
    std::string name;
    bool passed = true;
    std::vector<StepResult> steps;
  };
  std::vector<TestResult> tests;
  std::size_t steps_total = 0;
  std::size_t steps_passed = 0;
  bool all_passed = true;
};

/// Executes a plan-yaml suite against the transport: substitutes variables,
/// sends each step, re-extracts, and checks the recorded expectations.
/// Throws ConfigError on a suite the parser cannot understand.
ReplayReport replay_suite(const std::string& yaml_text, HttpTransport& transport);

std::string render_replay_report(const ReplayReport& report);

}  // namespace apifuzz
