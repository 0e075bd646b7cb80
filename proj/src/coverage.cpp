#include "apifuzz/coverage.hpp"

#include <algorithm>
#include <sstream>

#include "apifuzz/input_gen.hpp"

namespace apifuzz {

CoverageTarget CoverageTarget::endpoint_status(std::string ep, std::string family) {
  CoverageTarget t;
  t.kind = Kind::EndpointStatus;
  t.endpoint = std::move(ep);
  t.detail = std::move(family);
  return t;
}

CoverageTarget CoverageTarget::optional_combo(std::string ep, std::string mask, Qualified q) {
  CoverageTarget t;
  t.kind = Kind::OptionalCombo;
  t.qualified = q;
  t.endpoint = std::move(ep);
  t.detail = std::move(mask);
  return t;
}

CoverageTarget CoverageTarget::enum_value(std::string ep, std::string param, std::string display,
                                          Qualified q) {
  CoverageTarget t;
  t.kind = Kind::EnumValue;
  t.qualified = q;
  t.endpoint = std::move(ep);
  t.detail = std::move(param);
  t.value = std::move(display);
  return t;
}

CoverageTarget CoverageTarget::example_used(std::string ep, std::string slot, std::size_t index,
                                            Qualified q) {
  CoverageTarget t;
  t.kind = Kind::ExampleUsed;
  t.qualified = q;
  t.endpoint = std::move(ep);
  t.detail = std::move(slot);
  t.value = std::to_string(index);
  return t;
}

CoverageTarget CoverageTarget::link_followed(std::string ep, std::string status_key,
                                             std::string link, Qualified q) {
  CoverageTarget t;
  t.kind = Kind::LinkFollowed;
  t.qualified = q;
  t.endpoint = std::move(ep);
  t.detail = std::move(status_key);
  t.value = std::move(link);
  return t;
}

CoverageTarget CoverageTarget::fault_found(std::string ep, int code) {
  CoverageTarget t;
  t.kind = Kind::FaultFound;
  t.endpoint = std::move(ep);
  t.detail = std::to_string(code);
  return t;
}

std::string CoverageTarget::describe() const {
  std::string out;
  switch (kind) {
    case Kind::EndpointStatus: out = "status(" + endpoint + ", " + detail + ")"; break;
    case Kind::OptionalCombo: out = "optional-combo(" + endpoint + ", " + detail + ")"; break;
    case Kind::EnumValue: out = "enum-value(" + endpoint + ", " + detail + "=" + value + ")"; break;
    case Kind::ExampleUsed:
      out = "example-used(" + endpoint + ", " + detail + "#" + value + ")";
      break;
    case Kind::LinkFollowed:
      out = "link-followed(" + endpoint + ", " + detail + ":" + value + ")";
      break;
    case Kind::FaultFound: out = "fault-found(" + endpoint + ", " + detail + ")"; break;
  }
  if (qualified == Qualified::AnyStatus) out += " [any]";
  if (qualified == Qualified::Success2xx) out += " [2xx]";
  return out;
}

std::string endpoint_key(const EndpointSpec& endpoint) {
  return endpoint.verb + " " + endpoint.path;
}

std::string status_family(int status) {
  if (status >= 200 && status <= 299) return "2xx";
  if (status >= 400 && status <= 499) return "4xx";
  if (status >= 500 && status <= 599) return "5xx";
  return "";
}

bool status_key_matches(const std::string& key, int status) {
  if (key == "default") return true;
  if (key.size() == 3 && (key[1] == 'X' || key[1] == 'x') && (key[2] == 'X' || key[2] == 'x'))
    return key[0] - '0' == status / 100;
  return key == std::to_string(status);
}

namespace {

constexpr CoverageTarget::Qualified kQuals[] = {CoverageTarget::Qualified::AnyStatus,
                                                CoverageTarget::Qualified::Success2xx};

std::vector<const ParamSpec*> optional_query_params(const EndpointSpec& ep) {
  std::vector<const ParamSpec*> out;
  for (const auto& p : ep.params)
    if (p.location == ParamLocation::Query && !p.required) out.push_back(&p);
  return out;
}

/// Mirrors the generator's slot naming: object fields extend the slot with
/// "/name", array items and composite branches keep the parent slot.
void walk_example_slots(const ValueSchema& schema, const std::string& slot,
                        std::vector<std::pair<std::string, std::size_t>>& out) {
  for (std::size_t i = 0; i < schema.examples.size(); ++i) out.emplace_back(slot, i);
  for (const auto& field : schema.fields)
    walk_example_slots(field.schema, slot.empty() ? field.name : slot + "/" + field.name, out);
  if (schema.has_item()) walk_example_slots(schema.item[0], slot, out);
  for (const auto& branch : schema.branches) walk_example_slots(branch, slot, out);
}

const JsonValue* sent_param_value(const HttpAction& action, const ParamSpec& p) {
  const std::vector<std::pair<std::string, JsonValue>>* list = nullptr;
  switch (p.location) {
    case ParamLocation::Path: list = &action.path_params; break;
    case ParamLocation::Query: list = &action.query_params; break;
    case ParamLocation::Header: return nullptr;  // handled separately, headers are strings
  }
  for (const auto& [name, value] : *list)
    if (name == p.name && !value.is_undefined()) return &value;
  return nullptr;
}

}  // namespace

std::set<CoverageTarget> derive_targets(const ApiModel& model) {
  std::set<CoverageTarget> out;
  for (const auto& ep : model.endpoints) {
    const std::string key = endpoint_key(ep);
    for (const char* family : {"2xx", "4xx", "5xx"})
      out.insert(CoverageTarget::endpoint_status(key, family));

    auto optionals = optional_query_params(ep);
    if (!optionals.empty())
      for (const std::string& mask : presence_masks(optionals.size()))
        for (auto q : kQuals) out.insert(CoverageTarget::optional_combo(key, mask, q));

    for (const auto& p : ep.params)
      for (const auto& v : p.schema.enum_values)
        for (auto q : kQuals)
          out.insert(CoverageTarget::enum_value(key, p.name, v.to_display_string(), q));

    std::vector<std::pair<std::string, std::size_t>> slots;
    for (const auto& p : ep.params) {
      const std::string root = to_string(p.location) + "." + p.name;
      for (std::size_t i = 0; i < p.examples.size(); ++i) slots.emplace_back(root, i);
      walk_example_slots(p.schema, root, slots);
    }
    for (const auto& body : ep.request_bodies) walk_example_slots(body.schema, "body", slots);
    for (const auto& [slot, index] : slots)
      for (auto q : kQuals) out.insert(CoverageTarget::example_used(key, slot, index, q));

    for (const auto& resp : ep.responses)
      for (const auto& link : resp.links)
        for (auto q : kQuals)
          out.insert(CoverageTarget::link_followed(key, resp.status, link.name, q));
  }
  return out;
}

std::set<CoverageTarget> evidenced_targets(const Archive& archive, const TestCase& test,
                                           const std::vector<RecordedExchange>& exchanges) {
  std::set<CoverageTarget> out;
  auto add = [&](CoverageTarget t) {
    if (archive.pending.count(t) || archive.covered.count(t)) out.insert(std::move(t));
  };
  auto add_qualified = [&](CoverageTarget t, bool success) {
    t.qualified = CoverageTarget::Qualified::AnyStatus;
    add(t);
    if (success) {
      t.qualified = CoverageTarget::Qualified::Success2xx;
      add(std::move(t));
    }
  };

  const std::size_t n = std::min(test.actions.size(), exchanges.size());
  for (std::size_t i = 0; i < n; ++i) {
    const HttpAction& action = test.actions[i];
    const RecordedExchange& ex = exchanges[i];
    if (action.endpoint == nullptr || ex.status <= 0) continue;
    const std::string key = endpoint_key(*action.endpoint);
    const bool success = ex.status >= 200 && ex.status <= 299;

    if (std::string family = status_family(ex.status); !family.empty())
      add(CoverageTarget::endpoint_status(key, family));
    // Fault targets are not part of the derived universe; they come into
    // existence the moment evidence shows up, so they never gate all-covered.
    if (ex.status >= 500) out.insert(CoverageTarget::fault_found(key, 100));
    if (ex.fault_code == 101) out.insert(CoverageTarget::fault_found(key, 101));

    if (auto optionals = optional_query_params(*action.endpoint); !optionals.empty()) {
      std::string mask(optionals.size(), '0');
      for (std::size_t k = 0; k < optionals.size(); ++k)
        if (sent_param_value(action, *optionals[k]) != nullptr) mask[k] = '1';
      add_qualified(CoverageTarget::optional_combo(key, mask, {}), success);
    }

    for (const auto& p : action.endpoint->params) {
      if (p.schema.enum_values.empty()) continue;
      std::string sent;
      if (p.location == ParamLocation::Header) {
        for (const auto& [name, value] : action.headers)
          if (name == p.name) sent = value;
      } else if (const JsonValue* v = sent_param_value(action, p)) {
        sent = v->to_display_string();
      }
      if (sent.empty()) continue;
      for (const auto& v : p.schema.enum_values)
        if (v.to_display_string() == sent)
          add_qualified(CoverageTarget::enum_value(key, p.name, sent, {}), success);
    }

    for (const auto& [slot, index] : action.example_uses)
      add_qualified(CoverageTarget::example_used(key, slot, index, {}), success);

    if (!action.via_link.empty() && !ex.link_broken && action.via_link_source < n) {
      const HttpAction& source = test.actions[action.via_link_source];
      const RecordedExchange& source_ex = exchanges[action.via_link_source];
      if (source.endpoint != nullptr && source_ex.status > 0) {
        for (const auto& resp : source.endpoint->responses) {
          bool has_link = false;
          for (const auto& link : resp.links) has_link |= link.name == action.via_link;
          if (has_link && status_key_matches(resp.status, source_ex.status))
            add_qualified(CoverageTarget::link_followed(endpoint_key(*source.endpoint),
                                                        resp.status, action.via_link, {}),
                          success);
        }
      }
    }
  }
  return out;
}

std::set<CoverageTarget> record_execution(Archive& archive, const TestCase& test,
                                          const std::vector<RecordedExchange>& exchanges,
                                          Millis now) {
  std::set<CoverageTarget> evidenced = evidenced_targets(archive, test, exchanges);
  std::set<CoverageTarget> newly;
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t entry = npos;
  auto entry_index = [&]() {
    if (entry == npos) {
      archive.tests.push_back({test, exchanges, evidenced, now});
      entry = archive.tests.size() - 1;
    }
    return entry;
  };

  for (const auto& t : evidenced) {
    auto it = archive.covered.find(t);
    if (it == archive.covered.end()) {
      archive.covered[t] = entry_index();
      archive.covered_at[t] = now;
      archive.pending.erase(t);
      newly.insert(t);
    } else if (test.actions.size() < archive.tests[it->second].test.actions.size()) {
      it->second = entry_index();  // strictly shorter replacement, timestamp kept
    }
  }
  return newly;
}

namespace {

std::string suite_sort_key(const Archive::ArchivedTest& t) {
  std::string key;
  if (!t.test.actions.empty()) {
    key = t.test.actions.front().path_template + "\n" + t.test.actions.front().verb + "\n";
  }
  key += std::to_string(t.test.actions.size());
  for (const auto& target : t.covers) key += "\n" + target.describe();
  return key;
}

}  // namespace

std::vector<const Archive::ArchivedTest*> minimized_entries(const Archive& archive) {
  std::set<std::size_t> referenced;
  for (const auto& [target, index] : archive.covered) referenced.insert(index);
  std::vector<std::size_t> kept(referenced.begin(), referenced.end());

  // Later tests are eliminated first, so first-archived evidence survives.
  for (std::size_t pos = kept.size(); pos-- > 0;) {
    std::set<CoverageTarget> rest;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      if (j == pos) continue;
      const auto& covers = archive.tests[kept[j]].covers;
      rest.insert(covers.begin(), covers.end());
    }
    const auto& own = archive.tests[kept[pos]].covers;
    if (std::includes(rest.begin(), rest.end(), own.begin(), own.end()))
      kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(pos));
  }

  std::sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
    return suite_sort_key(archive.tests[a]) < suite_sort_key(archive.tests[b]);
  });
  std::vector<const Archive::ArchivedTest*> out;
  out.reserve(kept.size());
  for (std::size_t index : kept) out.push_back(&archive.tests[index]);
  return out;
}

std::vector<TestCase> minimized_suite(const Archive& archive) {
  std::vector<TestCase> out;
  for (const Archive::ArchivedTest* entry : minimized_entries(archive)) out.push_back(entry->test);
  return out;
}

namespace {

struct EndpointRow {
  std::size_t total = 0, covered = 0, success_total = 0, success_covered = 0;
};

std::map<std::string, EndpointRow> endpoint_rows(const Archive& archive) {
  std::map<std::string, EndpointRow> rows;
  auto tally = [&](const CoverageTarget& t, bool is_covered) {
    EndpointRow& row = rows[t.endpoint];
    row.total++;
    if (is_covered) row.covered++;
    if (t.qualified == CoverageTarget::Qualified::Success2xx) {
      row.success_total++;
      if (is_covered) row.success_covered++;
    }
  };
  for (const auto& t : archive.pending) tally(t, false);
  for (const auto& [t, index] : archive.covered) tally(t, true);
  return rows;
}

}  // namespace

std::string coverage_table(const Archive& archive) {
  auto rows = endpoint_rows(archive);
  std::size_t width = 8;
  for (const auto& [ep, row] : rows) width = std::max(width, ep.size());
  std::ostringstream out;
  out << std::left;
  out.width(static_cast<std::streamsize>(width));
  out << "endpoint";
  out << "  covered  2xx-covered\n";
  for (const auto& [ep, row] : rows) {
    out.width(static_cast<std::streamsize>(width));
    out << ep;
    out << "  " << row.covered << "/" << row.total << "  " << row.success_covered << "/"
        << row.success_total << "\n";
  }
  return out.str();
}

std::string coverage_json(const Archive& archive) {
  auto rows = endpoint_rows(archive);
  std::vector<JsonValue> endpoints;
  std::size_t total = 0, covered = 0;
  for (const auto& [ep, row] : rows) {
    total += row.total;
    covered += row.covered;
    endpoints.push_back(JsonValue::object({
        {"endpoint", JsonValue::string(ep)},
        {"targets", JsonValue::number(static_cast<long long>(row.total))},
        {"covered", JsonValue::number(static_cast<long long>(row.covered))},
        {"success-targets", JsonValue::number(static_cast<long long>(row.success_total))},
        {"success-covered", JsonValue::number(static_cast<long long>(row.success_covered))},
    }));
  }
  return JsonValue::object({
                               {"targets", JsonValue::number(static_cast<long long>(total))},
                               {"covered", JsonValue::number(static_cast<long long>(covered))},
                               {"endpoints", JsonValue::array(std::move(endpoints))},
                           })
      .dump();
}

}  // namespace apifuzz
