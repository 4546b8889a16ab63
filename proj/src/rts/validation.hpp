#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "rts/datamodel.hpp"

namespace rts {

enum class Severity { Error, Warning };

struct Issue {
  Severity severity;
  std::string code;
  std::string entity_id;
  std::string message;

  bool operator==(const Issue&) const = default;
};

// Error codes: DUP_ID, DANGLING_REF, EMPTY_SUITE, EMPTY_ID, UNKNOWN_RELEASE,
// DUP_RELEASE. Warning codes: EMPTY_DESCRIPTION, NO_HISTORY,
// MOSTLY_EMPTY_TEXT, CONTRADICTORY_HISTORY, DUP_HISTORY.
struct ValidationReport {
  std::vector<Issue> issues;
  bool corrupt = false;

  std::size_t count(Severity s) const;
  std::size_t count(const std::string& code) const;

  bool operator==(const ValidationReport&) const = default;
};

// Share of test descriptions that may be empty before MOSTLY_EMPTY_TEXT fires.
inline constexpr double kMostlyEmptyThreshold = 0.5;

ValidationReport validate_dataset(const Dataset& d);

nlohmann::json to_json(const ValidationReport& r);
std::string render_text(const ValidationReport& r);

}  // namespace rts
