#include "apifuzz/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "apifuzz/auth.hpp"
#include "apifuzz/coverage.hpp"
#include "apifuzz/emitter.hpp"
#include "apifuzz/engine.hpp"
#include "apifuzz/fixtures.hpp"
#include "apifuzz/schema_loader.hpp"
#include "apifuzz/transforms.hpp"
#include "apifuzz/util.hpp"

namespace apifuzz {

namespace {

struct FuzzFlags {
  std::string schema;
  std::string base_url;
  std::string max_time = "60s";
  std::string premature_stop;
  int rate_per_minute = 0;  // 0 = unlimited
  std::string endpoint_prefix;
  std::string tag_filter;
  std::vector<std::string> headers;
  std::string auth_config;
  std::string derived_params;
  std::string output_dir = "apifuzz-out";
  std::string format = "plan-yaml";
  std::uint64_t seed = 1;
};

struct ValidateFlags {
  std::string schema;
};

struct ReplayFlags {
  std::string suite;
  std::string base_url;
};

struct FixturesFlags {
  int port = 0;
  std::string token_lifetime;
};

std::pair<std::string, std::string> parse_header_flag(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos || colon == 0)
    throw ConfigError("--header expects NAME:VALUE, got: " + text);
  std::string value = text.substr(colon + 1);
  if (!value.empty() && value.front() == ' ') value.erase(0, 1);
  return {text.substr(0, colon), value};
}

int run_fuzz(const FuzzFlags& f, std::ostream& out) {
  auto [graph, warnings] = load_schema(make_source(f.schema));
  for (const auto& w : validate_schema(graph)) warnings.push_back(w);
  auto [model, model_warnings] = build_model(graph);
  for (const auto& w : model_warnings) warnings.push_back(w);
  if (!warnings.empty()) out << render_warnings_text(warnings);

  std::optional<std::string> prefix;
  if (!f.endpoint_prefix.empty()) prefix = f.endpoint_prefix;
  std::optional<std::set<std::string>> tags;
  if (!f.tag_filter.empty()) {
    tags.emplace();
    for (const auto& tag : split(f.tag_filter, ','))
      if (!trim(tag).empty()) tags->insert(trim(tag));
  }
  const ApiModel filtered = filter_endpoints(model, prefix, tags);
  if (filtered.endpoints.empty()) throw ConfigError("schema declares no operations");

  SessionConfig cfg;
  cfg.max_time = parse_duration(f.max_time);
  if (!f.premature_stop.empty()) cfg.premature_stop = parse_duration(f.premature_stop);
  if (f.rate_per_minute > 0) cfg.rate_per_minute = f.rate_per_minute;
  cfg.seed = f.seed;
  cfg.base_url = f.base_url;
  for (const auto& h : f.headers) cfg.extra_headers.push_back(parse_header_flag(h));
  if (!f.derived_params.empty())
    cfg.derived_rules = parse_derived_params_config(f.derived_params);
  validate_session_config(cfg);

  std::vector<AuthSpec> auth_specs;
  if (!f.auth_config.empty()) auth_specs = parse_auth_config(f.auth_config);
  const AuthSpec* auth = auth_specs.empty() ? nullptr : &auth_specs.front();
  if (auth_specs.size() > 1)
    out << "note: multiple auth specs configured; using \"" << auth_specs.front().name
        << "\"\n";

  RealTransport transport(f.base_url);
  RealClock clock;
  auto [archive, stats] =
      run_session(filtered, auth, derive_targets(filtered), cfg, transport, clock);

  const auto plans = make_plans(minimized_entries(archive));
  const EmitFormat format =
      f.format == "curl-script" ? EmitFormat::CurlScript : EmitFormat::PlanYaml;
  const std::string path = emit_suite(plans, f.output_dir, format);

  std::size_t fault_count = 0;
  for (const auto& plan : plans)
    for (const auto& fault : plan.faults) fault_count += fault.has_value() ? 1 : 0;

  out << "stop reason: " << stats.stop_reason << "\n";
  out << "requests issued: " << stats.requests_issued << "\n";
  out << "tests emitted: " << plans.size() << " (from " << archive.tests.size()
      << " archived)\n";
  out << "potential faults in emitted suite: " << fault_count << "\n";
  out << "suite written to " << path << "\n\n";
  out << coverage_table(archive);
  return 0;
}

int run_validate(const ValidateFlags& f, std::ostream& out) {
  auto [graph, warnings] = load_schema(make_source(f.schema));
  for (const auto& w : validate_schema(graph)) warnings.push_back(w);
  if (warnings.empty()) {
    out << "schema is clean: " << graph.nodes.size() << " document(s), no warnings\n";
    return 0;
  }
  out << render_warnings_text(warnings);
  return 1;
}

int run_replay(const ReplayFlags& f, std::ostream& out) {
  std::ifstream in(f.suite, std::ios::binary);
  if (!in) throw ConfigError("cannot read suite file: " + f.suite);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  RealTransport transport(f.base_url);
  const ReplayReport report = replay_suite(text, transport);
  out << render_replay_report(report);
  return report.all_passed ? 0 : 1;
}

[[noreturn]] void run_fixtures(const FixturesFlags& f, std::ostream& out) {
  FixtureOptions opts;
  if (!f.token_lifetime.empty()) opts.token_lifetime = parse_duration(f.token_lifetime);
  FixtureHub hub(opts);
  FixtureServer server(hub, f.port);
  out << "fixture APIs listening on " << server.base_url() << "\n";
  out << "  links API:      " << server.base_url() << "/api/links (schema /schemas/links.yaml)\n";
  out << "  token-auth API: " << server.base_url()
      << "/api/logintoken (schema /schemas/auth.yaml)\n";
  out << "  secure API:     " << server.base_url()
      << "/api/secure (schema /schemas/secure.yaml)\n";
  out << "  CRUD API:       " << server.base_url() << "/api/crud (schema /schemas/crud.yaml)\n";
  out << "  combined:       " << server.base_url() << "/openapi.yaml\n";
  out.flush();
  while (true) std::this_thread::sleep_for(std::chrono::hours(1));
}

}  // namespace

int cli_run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Black-box REST API fuzzer for OpenAPI-described services", "apifuzz"};
  app.require_subcommand(1);

  FuzzFlags fuzz;
  CLI::App* cmd_fuzz = app.add_subcommand("fuzz", "Fuzz a running service and emit a test suite");
  cmd_fuzz->add_option("--schema", fuzz.schema, "OpenAPI document (path or http(s) URL)")
      ->envname("APIFUZZ_SCHEMA")
      ->required();
  cmd_fuzz->add_option("--baseUrl", fuzz.base_url, "Base URL of the service under test")
      ->envname("APIFUZZ_BASE_URL")
      ->required();
  cmd_fuzz->add_option("--maxTime", fuzz.max_time, "Fuzzing budget (e.g. 30s, 10m, 1h)")
      ->envname("APIFUZZ_MAX_TIME")
      ->capture_default_str();
  cmd_fuzz->add_option("--prematureStop", fuzz.premature_stop,
                       "Stop after this long without new coverage (e.g. 10m)")
      ->envname("APIFUZZ_PREMATURE_STOP");
  cmd_fuzz->add_option("--ratePerMinute", fuzz.rate_per_minute,
                       "Cap on requests per minute (sliding window)")
      ->envname("APIFUZZ_RATE_PER_MINUTE")
      ->check(CLI::PositiveNumber);
  cmd_fuzz->add_option("--endpointPrefix", fuzz.endpoint_prefix,
                       "Only fuzz endpoints whose path starts with this prefix")
      ->envname("APIFUZZ_ENDPOINT_PREFIX");
  cmd_fuzz->add_option("--endpointTagFilter", fuzz.tag_filter,
                       "Only fuzz endpoints carrying one of these comma-separated tags")
      ->envname("APIFUZZ_ENDPOINT_TAG_FILTER");
  cmd_fuzz->add_option("--header", fuzz.headers,
                       "Extra header NAME:VALUE sent with every request (repeatable)")
      ->envname("APIFUZZ_HEADER");
  cmd_fuzz->add_option("--authConfig", fuzz.auth_config,
                       "Auth configuration file (YAML or TOML)")
      ->envname("APIFUZZ_AUTH_CONFIG");
  cmd_fuzz->add_option("--derivedParams", fuzz.derived_params,
                       "Derived-parameter rules file (YAML or TOML)")
      ->envname("APIFUZZ_DERIVED_PARAMS");
  cmd_fuzz->add_option("--outputDir", fuzz.output_dir, "Directory for the emitted suite")
      ->envname("APIFUZZ_OUTPUT_DIR")
      ->capture_default_str();
  cmd_fuzz->add_option("--format", fuzz.format, "Suite format")
      ->envname("APIFUZZ_FORMAT")
      ->check(CLI::IsMember({"plan-yaml", "curl-script"}))
      ->capture_default_str();
  cmd_fuzz->add_option("--seed", fuzz.seed, "Random seed (same seed, same session)")
      ->envname("APIFUZZ_SEED")
      ->capture_default_str();

  ValidateFlags validate;
  CLI::App* cmd_validate =
      app.add_subcommand("validate", "Load a schema and report warnings without fuzzing");
  cmd_validate->add_option("--schema", validate.schema, "OpenAPI document (path or URL)")
      ->envname("APIFUZZ_SCHEMA")
      ->required();

  ReplayFlags replay;
  CLI::App* cmd_replay =
      app.add_subcommand("replay", "Execute an emitted plan-yaml suite against a service");
  cmd_replay->add_option("--suite", replay.suite, "Path to suite.yaml")->required();
  cmd_replay->add_option("--baseUrl", replay.base_url, "Base URL of the service under test")
      ->envname("APIFUZZ_BASE_URL")
      ->required();

  FixturesFlags fixtures;
  CLI::App* cmd_fixtures =
      app.add_subcommand("fixtures", "Serve the bundled demo APIs on localhost (foreground)");
  cmd_fixtures->add_option("--port", fixtures.port, "Listen port (0 picks a free port)")
      ->capture_default_str();
  cmd_fixtures->add_option("--tokenLifetime", fixtures.token_lifetime,
                           "Expiry for issued login tokens (e.g. 5m); default never");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (auto subs = target->get_subcommands(); !subs.empty();
         subs = target->get_subcommands())
      target = subs.front();
    out << target->help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const CLI::App* target = &app;
    for (auto subs = target->get_subcommands(); !subs.empty();
         subs = target->get_subcommands())
      target = subs.front();
    err << target->help();
    return 2;
  }

  try {
    if (cmd_fuzz->parsed()) return run_fuzz(fuzz, out);
    if (cmd_validate->parsed()) return run_validate(validate, out);
    if (cmd_replay->parsed()) return run_replay(replay, out);
    if (cmd_fixtures->parsed()) run_fixtures(fixtures, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const AuthError& e) {
    err << "fatal: " << e.what() << "\n";
    return 3;
  } catch (const EnvironmentError& e) {
    err << "fatal: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace apifuzz
