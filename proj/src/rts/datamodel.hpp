#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace rts {

enum class Verdict { Pass, Fail, Skipped };

std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

struct HistoryEntry {
  std::string release;
  bool executed = false;
  Verdict verdict = Verdict::Skipped;
  std::vector<std::string> revealed_defect_ids;

  bool operator==(const HistoryEntry&) const = default;
};

struct TestCase {
  std::string id;
  std::string title;
  std::string description;
  std::vector<std::string> requirement_ids;
  std::vector<std::string> defect_ids;
  std::vector<std::string> tags;
  std::vector<HistoryEntry> history;

  // Entry for `release`, or nullptr. A test carries at most one entry per
  // release; duplicates are reported by validation and the first one wins.
  const HistoryEntry* history_at(std::string_view release) const;

  bool operator==(const TestCase&) const = default;
};

struct Requirement {
  std::string id;
  std::string title;
  std::string description;
  std::vector<std::string> changed_in_releases;

  bool operator==(const Requirement&) const = default;
};

struct Defect {
  std::string id;
  std::string title;
  int severity = 0;
  std::string found_in_release;

  bool operator==(const Defect&) const = default;
};

inline constexpr int kSchemaVersion = 1;

// The project data working copy: tests, requirements, defects and their
// relations, plus the ordered release list (oldest first).
struct Dataset {
  int schema_version = kSchemaVersion;
  std::string project;
  std::vector<std::string> releases;
  std::vector<TestCase> tests;
  std::vector<Requirement> requirements;
  std::vector<Defect> defects;

  // Position of `release` in `releases`, or nullopt.
  std::optional<std::size_t> release_index(std::string_view release) const;
  const TestCase* find_test(std::string_view id) const;

  bool operator==(const Dataset&) const = default;
};

// Parsing. Throws Error{MalformedInput} when the bytes are not JSON and
// Error{SchemaViolation} (message starts with the JSON path) when a required
// field is missing or has the wrong type. Unknown keys are ignored.
Dataset load_dataset(std::string_view bytes);
Dataset load_dataset_file(const std::filesystem::path& path);
Dataset dataset_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const Dataset& d);
std::string serialize_dataset(const Dataset& d);

}  // namespace rts
