#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rts/features.hpp"
#include "rts/ranker.hpp"
#include "rts/verification.hpp"

namespace rts {

// Steps of the selection workflow for one release.
enum class SessionState {
  Created,
  DataLoaded,
  FeaturesScoped,
  TrainingLabeled,
  Trained,
  VerificationLabeled,
  Assessed,
  Accepted,
  Iterating,
  Aborted,
  PostTestRecorded,
};

enum class EventKind {
  LoadData,
  ScopeFeatures,
  LabelTraining,
  Train,
  DrawVerification,
  LabelVerification,
  Assess,
  Accept,
  Iterate,
  Abort,
  RecordPostTest,
  Relabel,
};

inline constexpr SessionState kAllStates[] = {
    SessionState::Created,       SessionState::DataLoaded,       SessionState::FeaturesScoped,
    SessionState::TrainingLabeled, SessionState::Trained,        SessionState::VerificationLabeled,
    SessionState::Assessed,      SessionState::Accepted,         SessionState::Iterating,
    SessionState::Aborted,       SessionState::PostTestRecorded,
};

inline constexpr EventKind kAllEvents[] = {
    EventKind::LoadData,         EventKind::ScopeFeatures, EventKind::LabelTraining,
    EventKind::Train,            EventKind::DrawVerification, EventKind::LabelVerification,
    EventKind::Assess,           EventKind::Accept,        EventKind::Iterate,
    EventKind::Abort,            EventKind::RecordPostTest, EventKind::Relabel,
};

std::string_view to_string(SessionState s);
std::string_view to_string(EventKind e);
std::optional<SessionState> parse_state(std::string_view s);
std::optional<EventKind> parse_event(std::string_view s);

// Target state of `event` in `from`, or nullopt when the pair is not in the
// transition table. DrawVerification and Relabel are self-loops.
std::optional<SessionState> next_state(SessionState from, EventKind event);

struct AuditRecord {
  std::uint64_t seq = 0;
  std::string timestamp;  // ISO-8601 UTC
  std::string actor;
  EventKind event = EventKind::LoadData;
  nlohmann::json payload;
  std::string digest;  // hex FNV-1a 64 over the canonical record without digest

  bool operator==(const AuditRecord&) const = default;
};

struct Event {
  EventKind kind;
  nlohmann::json payload = nlohmann::json::object();
  std::string actor = "test-manager";
  std::string timestamp;  // filled with the current UTC time when empty
};

inline constexpr int kDefaultMaxIterations = 5;

struct Session {
  std::string id;
  SessionState state = SessionState::Created;
  std::string dataset_ref;
  std::optional<FeatureScope> scope;
  LabelSet labels;
  std::optional<RankModel> model;
  std::optional<RankedSuite> suite;
  std::optional<VerificationDraw> draw;
  std::vector<AdequacyReport> reports;
  std::optional<SelectionResult> selection;
  int iteration = 0;
  int max_iterations = kDefaultMaxIterations;
  std::vector<AuditRecord> audit;
  std::optional<std::string> reflection;
  std::optional<std::string> improvement_notes;

  bool operator==(const Session&) const = default;
};

Session new_session(std::string id, int max_iterations = kDefaultMaxIterations);

// Applies one event. The input is never modified; on success the result has
// the new state, the merged payload and exactly one more audit record.
// Throws IllegalTransition, IterationLimit, PayloadInvalid or UnknownTestId.
Session transition(const Session& s, const Event& event);

Session record_posttest(const Session& s, std::string reflection, std::string improvement_notes,
                        std::string actor = "test-manager");

// Decisions the human may take from Assessed, in the order they are offered.
// After the last allowed iteration with a non-adequate report, abort comes
// first and iterate is no longer offered.
std::vector<std::string> available_decisions(const Session& s);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);
std::string record_digest(const AuditRecord& r);

// Rebuilds a session by replaying its audit events from Created.
Session replay(const std::string& id, int max_iterations, const std::vector<AuditRecord>& audit);

nlohmann::json to_json(const Session& s);
Session session_from_json(const nlohmann::json& j);  // throws StoreCorrupt
std::string session_digest(const Session& s);

// Checks every record digest and that replaying the audit reproduces `s`.
// Throws StoreCorrupt on the first mismatch.
void verify_integrity(const Session& s);

std::string utc_now();

}  // namespace rts
