#include "rts/datamodel.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rts/error.hpp"

namespace rts {

using nlohmann::json;

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Skipped: return "skipped";
  }
  return "skipped";
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  if (s == "pass") return Verdict::Pass;
  if (s == "fail") return Verdict::Fail;
  if (s == "skipped") return Verdict::Skipped;
  return std::nullopt;
}

const HistoryEntry* TestCase::history_at(std::string_view release) const {
  for (const auto& h : history) {
    if (h.release == release) return &h;
  }
  return nullptr;
}

std::optional<std::size_t> Dataset::release_index(std::string_view release) const {
  auto it = std::find(releases.begin(), releases.end(), release);
  if (it == releases.end()) return std::nullopt;
  return static_cast<std::size_t>(it - releases.begin());
}

const TestCase* Dataset::find_test(std::string_view id) const {
  for (const auto& t : tests) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

namespace {

[[noreturn]] void violation(const std::string& path, const std::string& what) {
  fail(ErrorCode::SchemaViolation, path + ": " + what);
}

const json* member(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string req_string(const json& obj, const char* key, const std::string& path) {
  const json* v = member(obj, key);
  if (!v) violation(path + "." + key, "missing required field");
  if (!v->is_string()) violation(path + "." + key, "expected string");
  return v->get<std::string>();
}

std::string opt_string(const json& obj, const char* key, const std::string& path) {
  const json* v = member(obj, key);
  if (!v) return {};
  if (!v->is_string()) violation(path + "." + key, "expected string");
  return v->get<std::string>();
}

std::vector<std::string> opt_strings(const json& obj, const char* key,
                                     const std::string& path) {
  const json* v = member(obj, key);
  if (!v) return {};
  if (!v->is_array()) violation(path + "." + key, "expected array");
  std::vector<std::string> out;
  out.reserve(v->size());
  for (std::size_t i = 0; i < v->size(); ++i) {
    const json& e = (*v)[i];
    if (!e.is_string()) {
      violation(path + "." + key + "[" + std::to_string(i) + "]", "expected string");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

const json& opt_array(const json& obj, const char* key, const std::string& path) {
  static const json empty = json::array();
  const json* v = member(obj, key);
  if (!v) return empty;
  if (!v->is_array()) violation(path + key, "expected array");
  return *v;
}

void require_object(const json& v, const std::string& path) {
  if (!v.is_object()) violation(path, "expected object");
}

HistoryEntry parse_history(const json& obj, const std::string& path) {
  require_object(obj, path);
  HistoryEntry h;
  h.release = req_string(obj, "release", path);
  const std::string verdict = req_string(obj, "verdict", path);
  auto parsed = parse_verdict(verdict);
  if (!parsed) violation(path + ".verdict", "expected one of pass, fail, skipped");
  h.verdict = *parsed;
  if (const json* e = member(obj, "executed")) {
    if (!e->is_boolean()) violation(path + ".executed", "expected boolean");
    h.executed = e->get<bool>();
  } else {
    h.executed = h.verdict != Verdict::Skipped;
  }
  h.revealed_defect_ids = opt_strings(obj, "revealed_defect_ids", path);
  return h;
}

TestCase parse_test(const json& obj, const std::string& path) {
  require_object(obj, path);
  TestCase t;
  t.id = req_string(obj, "id", path);
  t.title = opt_string(obj, "title", path);
  t.description = opt_string(obj, "description", path);
  t.requirement_ids = opt_strings(obj, "requirement_ids", path);
  t.defect_ids = opt_strings(obj, "defect_ids", path);
  t.tags = opt_strings(obj, "tags", path);
  const json& hist = opt_array(obj, "history", path + ".");
  for (std::size_t i = 0; i < hist.size(); ++i) {
    t.history.push_back(parse_history(hist[i], path + ".history[" + std::to_string(i) + "]"));
  }
  return t;
}

Requirement parse_requirement(const json& obj, const std::string& path) {
  require_object(obj, path);
  Requirement r;
  r.id = req_string(obj, "id", path);
  r.title = opt_string(obj, "title", path);
  r.description = opt_string(obj, "description", path);
  r.changed_in_releases = opt_strings(obj, "changed_in_releases", path);
  return r;
}

Defect parse_defect(const json& obj, const std::string& path) {
  require_object(obj, path);
  Defect d;
  d.id = req_string(obj, "id", path);
  d.title = opt_string(obj, "title", path);
  if (const json* s = member(obj, "severity")) {
    if (!s->is_number_integer()) violation(path + ".severity", "expected integer");
    d.severity = s->get<int>();
  }
  d.found_in_release = opt_string(obj, "found_in_release", path);
  return d;
}

}  // namespace

Dataset dataset_from_json(const json& doc) {
  require_object(doc, "$");
  Dataset d;
  const json* version = member(doc, "schema_version");
  if (!version) violation("schema_version", "missing required field");
  if (!version->is_number_integer()) violation("schema_version", "expected integer");
  d.schema_version = version->get<int>();
  if (d.schema_version != kSchemaVersion) {
    violation("schema_version", "unsupported version " + std::to_string(d.schema_version));
  }
  d.project = opt_string(doc, "project", "$");
  d.releases = opt_strings(doc, "releases", "$");

  const json* tests = member(doc, "tests");
  if (!tests) violation("tests", "missing required field");
  if (!tests->is_array()) violation("tests", "expected array");
  for (std::size_t i = 0; i < tests->size(); ++i) {
    d.tests.push_back(parse_test((*tests)[i], "tests[" + std::to_string(i) + "]"));
  }
  const json& reqs = opt_array(doc, "requirements", "");
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    d.requirements.push_back(
        parse_requirement(reqs[i], "requirements[" + std::to_string(i) + "]"));
  }
  const json& defects = opt_array(doc, "defects", "");
  for (std::size_t i = 0; i < defects.size(); ++i) {
    d.defects.push_back(parse_defect(defects[i], "defects[" + std::to_string(i) + "]"));
  }
  return d;
}

Dataset load_dataset(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::MalformedInput, std::string("dataset is not valid JSON: ") + e.what());
  }
  return dataset_from_json(doc);
}

Dataset load_dataset_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open dataset file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_dataset(buf.str());
}

json to_json(const Dataset& d) {
  json tests = json::array();
  for (const auto& t : d.tests) {
    json history = json::array();
    for (const auto& h : t.history) {
      history.push_back({{"release", h.release},
                         {"executed", h.executed},
                         {"verdict", to_string(h.verdict)},
                         {"revealed_defect_ids", h.revealed_defect_ids}});
    }
    tests.push_back({{"id", t.id},
                     {"title", t.title},
                     {"description", t.description},
                     {"requirement_ids", t.requirement_ids},
                     {"defect_ids", t.defect_ids},
                     {"tags", t.tags},
                     {"history", std::move(history)}});
  }
  json reqs = json::array();
  for (const auto& r : d.requirements) {
    reqs.push_back({{"id", r.id},
                    {"title", r.title},
                    {"description", r.description},
                    {"changed_in_releases", r.changed_in_releases}});
  }
  json defects = json::array();
  for (const auto& f : d.defects) {
    defects.push_back({{"id", f.id},
                       {"title", f.title},
                       {"severity", f.severity},
                       {"found_in_release", f.found_in_release}});
  }
  return {{"schema_version", d.schema_version},
          {"project", d.project},
          {"releases", d.releases},
          {"tests", std::move(tests)},
          {"requirements", std::move(reqs)},
          {"defects", std::move(defects)}};
}

std::string serialize_dataset(const Dataset& d) { return to_json(d).dump(); }

}  // namespace rts
