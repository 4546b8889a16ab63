#include "rts/validation.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

namespace rts {

std::size_t ValidationReport::count(Severity s) const {
  return static_cast<std::size_t>(std::count_if(
      issues.begin(), issues.end(), [s](const Issue& i) { return i.severity == s; }));
}

std::size_t ValidationReport::count(const std::string& code) const {
  return static_cast<std::size_t>(std::count_if(
      issues.begin(), issues.end(), [&](const Issue& i) { return i.code == code; }));
}

namespace {

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return c == ' ' || (c >= '\t' && c <= '\r'); });
}

class Collector {
 public:
  void error(std::string code, std::string entity, std::string message) {
    issues_.push_back({Severity::Error, std::move(code), std::move(entity), std::move(message)});
  }
  void warning(std::string code, std::string entity, std::string message) {
    issues_.push_back({Severity::Warning, std::move(code), std::move(entity), std::move(message)});
  }
  std::vector<Issue> take() { return std::move(issues_); }

 private:
  std::vector<Issue> issues_;
};

// One DUP_ID per duplicated id value, in order of first appearance.
template <typename Range>
std::unordered_set<std::string> check_ids(const Range& items, const char* kind, Collector& out) {
  std::map<std::string, int> seen;
  std::vector<std::string> order;
  for (const auto& item : items) {
    if (item.id.empty()) {
      out.error("EMPTY_ID", "", std::string(kind) + " with empty id");
      continue;
    }
    if (seen[item.id]++ == 0) order.push_back(item.id);
  }
  for (const auto& id : order) {
    if (seen[id] > 1) {
      out.error("DUP_ID", id,
                std::string(kind) + " id '" + id + "' appears " + std::to_string(seen[id]) +
                    " times");
    }
  }
  return {order.begin(), order.end()};
}

}  // namespace

ValidationReport validate_dataset(const Dataset& d) {
  Collector out;

  if (d.tests.empty()) out.error("EMPTY_SUITE", d.project, "dataset contains no tests");

  std::set<std::string> releases;
  for (const auto& r : d.releases) {
    if (!releases.insert(r).second) {
      out.error("DUP_RELEASE", r, "release '" + r + "' listed more than once");
    }
  }
  auto check_release = [&](const std::string& entity, const std::string& release,
                           const char* where) {
    if (!releases.contains(release)) {
      out.error("UNKNOWN_RELEASE", entity,
                std::string(where) + " references release '" + release +
                    "' missing from the release list");
    }
  };

  const auto test_ids = check_ids(d.tests, "test", out);
  const auto req_ids = check_ids(d.requirements, "requirement", out);
  const auto defect_ids = check_ids(d.defects, "defect", out);
  (void)test_ids;

  for (const auto& r : d.requirements) {
    for (const auto& rel : r.changed_in_releases) check_release(r.id, rel, "changed_in_releases");
  }
  for (const auto& f : d.defects) {
    if (!f.found_in_release.empty()) check_release(f.id, f.found_in_release, "found_in_release");
  }

  std::size_t empty_descriptions = 0;
  for (const auto& t : d.tests) {
    std::set<std::string> dangling;
    auto ref = [&](const std::string& id, const std::unordered_set<std::string>& space,
                   const char* kind) {
      if (!space.contains(id) && dangling.insert(std::string(kind) + id).second) {
        out.error("DANGLING_REF", t.id,
                  "test '" + t.id + "' references unknown " + kind + " '" + id + "'");
      }
    };
    for (const auto& r : t.requirement_ids) ref(r, req_ids, "requirement");
    for (const auto& f : t.defect_ids) ref(f, defect_ids, "defect");

    if (blank(t.description)) {
      ++empty_descriptions;
      out.warning("EMPTY_DESCRIPTION", t.id, "test '" + t.id + "' has an empty description");
    }
    if (t.history.empty()) {
      out.warning("NO_HISTORY", t.id, "test '" + t.id + "' has no execution history");
    }
    std::set<std::string> history_releases;
    for (const auto& h : t.history) {
      check_release(t.id, h.release, "history");
      if (!history_releases.insert(h.release).second) {
        out.warning("DUP_HISTORY", t.id,
                    "test '" + t.id + "' has several history entries for '" + h.release + "'");
      }
      for (const auto& f : h.revealed_defect_ids) ref(f, defect_ids, "defect");
      if (!h.executed && h.verdict != Verdict::Skipped) {
        out.warning("CONTRADICTORY_HISTORY", t.id,
                    "release '" + h.release + "': verdict " + std::string(to_string(h.verdict)) +
                        " but not executed");
      }
      if (!h.revealed_defect_ids.empty() && h.verdict != Verdict::Fail) {
        out.warning("CONTRADICTORY_HISTORY", t.id,
                    "release '" + h.release + "': revealed defects without a fail verdict");
      }
    }
  }

  if (!d.tests.empty() &&
      static_cast<double>(empty_descriptions) >
          kMostlyEmptyThreshold * static_cast<double>(d.tests.size())) {
    out.warning("MOSTLY_EMPTY_TEXT", d.project,
                std::to_string(empty_descriptions) + " of " + std::to_string(d.tests.size()) +
                    " test descriptions are empty");
  }

  ValidationReport report;
  report.issues = out.take();
  report.corrupt = report.count(Severity::Error) > 0;
  return report;
}

nlohmann::json to_json(const ValidationReport& r) {
  nlohmann::json issues = nlohmann::json::array();
  for (const auto& i : r.issues) {
    issues.push_back({{"severity", i.severity == Severity::Error ? "error" : "warning"},
                      {"code", i.code},
                      {"entity_id", i.entity_id},
                      {"message", i.message}});
  }
  return {{"corrupt", r.corrupt},
          {"errors", r.count(Severity::Error)},
          {"warnings", r.count(Severity::Warning)},
          {"issues", std::move(issues)}};
}

std::string render_text(const ValidationReport& r) {
  std::ostringstream os;
  for (const auto& i : r.issues) {
    os << (i.severity == Severity::Error ? "error   " : "warning ") << i.code;
    if (!i.entity_id.empty()) os << " [" << i.entity_id << "]";
    os << ": " << i.message << '\n';
  }
  os << r.issues.size() << (r.issues.size() == 1 ? " issue" : " issues") << " ("
     << r.count(Severity::Error) << " errors, " << r.count(Severity::Warning) << " warnings)";
  os << (r.corrupt ? " - dataset is corrupt\n" : "\n");
  return os.str();
}

}  // namespace rts
