#include "rts/session.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>

#include "rts/error.hpp"
#include "rts/serialize.hpp"

namespace rts {

using nlohmann::json;

namespace {

constexpr std::string_view kStateNames[] = {
    "Created", "DataLoaded", "FeaturesScoped", "TrainingLabeled", "Trained", "VerificationLabeled",
    "Assessed", "Accepted", "Iterating", "Aborted", "PostTestRecorded",
};

constexpr std::string_view kEventNames[] = {
    "LoadData", "ScopeFeatures", "LabelTraining", "Train", "DrawVerification", "LabelVerification",
    "Assess", "Accept", "Iterate", "Abort", "RecordPostTest", "Relabel",
};

}  // namespace

std::string_view to_string(SessionState s) { return kStateNames[static_cast<int>(s)]; }
std::string_view to_string(EventKind e) { return kEventNames[static_cast<int>(e)]; }

std::optional<SessionState> parse_state(std::string_view s) {
  for (auto st : kAllStates) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

std::optional<EventKind> parse_event(std::string_view s) {
  for (auto ev : kAllEvents) {
    if (to_string(ev) == s) return ev;
  }
  return std::nullopt;
}

std::optional<SessionState> next_state(SessionState from, EventKind event) {
  using S = SessionState;
  using E = EventKind;
  switch (event) {
    case E::LoadData:
      if (from == S::Created) return S::DataLoaded;
      break;
    case E::ScopeFeatures:
      if (from == S::DataLoaded) return S::FeaturesScoped;
      break;
    case E::LabelTraining:
      if (from == S::FeaturesScoped || from == S::Iterating) return S::TrainingLabeled;
      break;
    case E::Train:
      if (from == S::TrainingLabeled) return S::Trained;
      break;
    case E::DrawVerification:
      if (from == S::Trained) return S::Trained;
      break;
    case E::LabelVerification:
      if (from == S::Trained) return S::VerificationLabeled;
      break;
    case E::Assess:
      if (from == S::VerificationLabeled) return S::Assessed;
      break;
    case E::Accept:
      if (from == S::Assessed) return S::Accepted;
      break;
    case E::Iterate:
      if (from == S::Assessed) return S::Iterating;
      break;
    case E::Abort:
      if (from == S::Assessed) return S::Aborted;
      break;
    case E::RecordPostTest:
      if (from == S::Accepted || from == S::Aborted) return S::PostTestRecorded;
      break;
    case E::Relabel:
      if (from == S::TrainingLabeled || from == S::Iterating || from == S::VerificationLabeled) {
        return from;
      }
      break;
  }
  return std::nullopt;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string record_digest(const AuditRecord& r) {
  const json canonical = {{"seq", r.seq},
                          {"timestamp", r.timestamp},
                          {"actor", r.actor},
                          {"event", to_string(r.event)},
                          {"payload", r.payload}};
  return hex64(fnv1a64(canonical.dump()));
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

Session new_session(std::string id, int max_iterations) {
  if (id.empty()) fail(ErrorCode::InvalidArgument, "session id must not be empty");
  if (max_iterations < 0) fail(ErrorCode::InvalidArgument, "max_iterations must be >= 0");
  Session s;
  s.id = std::move(id);
  s.max_iterations = max_iterations;
  return s;
}

namespace {

[[noreturn]] void invalid(const std::string& msg) { fail(ErrorCode::PayloadInvalid, msg); }

const json& field(const json& payload, const char* key) {
  if (!payload.is_object()) invalid("event payload must be a JSON object");
  auto it = payload.find(key);
  if (it == payload.end()) invalid(std::string("event payload lacks '") + key + "'");
  return *it;
}

std::string string_field(const json& payload, const char* key) {
  const json& v = field(payload, key);
  if (!v.is_string()) invalid(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

LabelSet entries_with_role(const json& payload, Role role) {
  LabelSet incoming = labels_from_json(field(payload, "entries"));
  if (incoming.entries.empty()) invalid("label batch is empty");
  std::set<std::string> seen;
  for (const auto& e : incoming.entries) {
    if (e.role != role) {
      invalid("label for '" + e.test_id + "' has role " + std::string(to_string(e.role)) +
              ", expected " + std::string(to_string(role)));
    }
    if (!seen.insert(e.test_id).second) invalid("test '" + e.test_id + "' labeled twice in batch");
  }
  return incoming;
}

LabelEntry* find_label(LabelSet& labels, std::string_view id) {
  for (auto& e : labels.entries) {
    if (e.test_id == id) return &e;
  }
  return nullptr;
}

void apply(Session& s, EventKind kind, const json& payload) {
  switch (kind) {
    case EventKind::LoadData: {
      s.dataset_ref = string_field(payload, "dataset_ref");
      if (s.dataset_ref.empty()) invalid("dataset_ref must not be empty");
      break;
    }
    case EventKind::ScopeFeatures:
      s.scope = scope_from_json(field(payload, "scope"));
      break;
    case EventKind::LabelTraining: {
      const LabelSet incoming = entries_with_role(payload, Role::Training);
      for (const auto& e : incoming.entries) {
        LabelEntry* existing = find_label(s.labels, e.test_id);
        if (!existing) {
          s.labels.entries.push_back(e);
        } else if (existing->role == Role::Verification && existing->label == e.label) {
          existing->role = Role::Training;  // reuse an earlier verification decision
        } else {
          invalid("test '" + e.test_id + "' is already labeled; use a relabel event");
        }
      }
      if (s.state == SessionState::Iterating) {
        s.model.reset();
        s.suite.reset();
        s.draw.reset();
      }
      break;
    }
    case EventKind::Train: {
      RankModel model = model_from_json(field(payload, "model"));
      RankedSuite suite = suite_from_json(field(payload, "suite"));
      for (const auto& e : suite.entries) {
        const LabelEntry* l = s.labels.find(e.test_id);
        if (l && l->role == Role::Training) {
          invalid("ranked suite contains training-labeled test '" + e.test_id + "'");
        }
      }
      s.model = std::move(model);
      s.suite = std::move(suite);
      s.draw.reset();
      break;
    }
    case EventKind::DrawVerification: {
      VerificationDraw draw = draw_from_json(field(payload, "draw"));
      for (const auto& id : draw.test_ids) {
        if (!s.suite || !s.suite->find(id)) invalid("drawn test '" + id + "' is not ranked");
      }
      s.draw = std::move(draw);
      break;
    }
    case EventKind::LabelVerification: {
      const LabelSet incoming = entries_with_role(payload, Role::Verification);
      for (const auto& e : incoming.entries) {
        if (!s.suite || !s.suite->find(e.test_id)) {
          fail(ErrorCode::UnknownTestId, "verification label for unranked test '" + e.test_id + "'");
        }
        if (s.labels.find(e.test_id)) {
          invalid("test '" + e.test_id + "' is already labeled; use a relabel event");
        }
      }
      s.labels.entries.insert(s.labels.entries.end(), incoming.entries.begin(),
                              incoming.entries.end());
      break;
    }
    case EventKind::Assess:
      s.reports.push_back(adequacy_from_json(field(payload, "report")));
      break;
    case EventKind::Accept:
      s.selection = selection_from_json(field(payload, "selection"));
      break;
    case EventKind::Iterate:
      if (s.iteration >= s.max_iterations) {
        fail(ErrorCode::IterationLimit, "iteration limit of " + std::to_string(s.max_iterations) +
                                            " reached; accept or abort");
      }
      ++s.iteration;
      break;
    case EventKind::Abort:
      break;
    case EventKind::RecordPostTest:
      s.reflection = string_field(payload, "reflection");
      s.improvement_notes = string_field(payload, "improvement_notes");
      break;
    case EventKind::Relabel: {
      const std::string id = string_field(payload, "test_id");
      const auto label = parse_label(string_field(payload, "label"));
      if (!label) invalid("relabel: label must be 'in' or 'out'");
      LabelEntry* existing = find_label(s.labels, id);
      if (!existing) fail(ErrorCode::UnknownTestId, "relabel: test '" + id + "' has no label");
      if (existing->label == *label) invalid("relabel: test '" + id + "' already has that label");
      existing->label = *label;
      break;
    }
  }
}

}  // namespace

Session transition(const Session& s, const Event& event) {
  const auto to = next_state(s.state, event.kind);
  if (!to) {
    fail(ErrorCode::IllegalTransition, "event " + std::string(to_string(event.kind)) +
                                           " is not allowed in state " +
                                           std::string(to_string(s.state)));
  }
  Session out = s;
  apply(out, event.kind, event.payload);
  out.state = *to;

  AuditRecord rec;
  rec.seq = out.audit.size() + 1;
  rec.timestamp = event.timestamp.empty() ? utc_now() : event.timestamp;
  rec.actor = event.actor;
  rec.event = event.kind;
  rec.payload = event.payload;
  rec.digest = record_digest(rec);
  out.audit.push_back(std::move(rec));
  return out;
}

Session record_posttest(const Session& s, std::string reflection, std::string improvement_notes,
                        std::string actor) {
  return transition(s, {EventKind::RecordPostTest,
                        {{"reflection", std::move(reflection)},
                         {"improvement_notes", std::move(improvement_notes)}},
                        std::move(actor)});
}

std::vector<std::string> available_decisions(const Session& s) {
  if (s.state != SessionState::Assessed) return {};
  const bool adequate = !s.reports.empty() && s.reports.back().verdict == Adequacy::Adequate;
  if (s.iteration >= s.max_iterations) {
    if (!adequate) return {"abort", "accept"};
    return {"accept", "abort"};
  }
  return {"accept", "iterate", "abort"};
}

Session replay(const std::string& id, int max_iterations, const std::vector<AuditRecord>& audit) {
  Session s = new_session(id, max_iterations);
  for (const auto& rec : audit) {
    s = transition(s, {rec.event, rec.payload, rec.actor, rec.timestamp});
  }
  return s;
}

namespace {

template <typename T, typename F>
json optional_json(const std::optional<T>& v, F&& f) {
  return v ? f(*v) : json(nullptr);
}

}  // namespace

json to_json(const Session& s) {
  json audit = json::array();
  for (const auto& r : s.audit) {
    audit.push_back({{"seq", r.seq},
                     {"timestamp", r.timestamp},
                     {"actor", r.actor},
                     {"event", to_string(r.event)},
                     {"payload", r.payload},
                     {"digest", r.digest}});
  }
  json reports = json::array();
  for (const auto& r : s.reports) reports.push_back(to_json(r));
  auto as_json = [](const auto& v) { return to_json(v); };
  return {{"id", s.id},
          {"state", to_string(s.state)},
          {"dataset_ref", s.dataset_ref},
          {"scope", optional_json(s.scope, as_json)},
          {"labels", to_json(s.labels)},
          {"model", optional_json(s.model, as_json)},
          {"suite", optional_json(s.suite, as_json)},
          {"draw", optional_json(s.draw, as_json)},
          {"reports", std::move(reports)},
          {"selection", optional_json(s.selection, as_json)},
          {"iteration", s.iteration},
          {"max_iterations", s.max_iterations},
          {"reflection", s.reflection ? json(*s.reflection) : json(nullptr)},
          {"improvement_notes", s.improvement_notes ? json(*s.improvement_notes) : json(nullptr)},
          {"audit", std::move(audit)}};
}

Session session_from_json(const json& j) {
  try {
    Session s;
    s.id = j.at("id").get<std::string>();
    auto state = parse_state(j.at("state").get<std::string>());
    if (!state) fail(ErrorCode::StoreCorrupt, "unknown session state");
    s.state = *state;
    s.dataset_ref = j.at("dataset_ref").get<std::string>();
    if (!j.at("scope").is_null()) s.scope = scope_from_json(j.at("scope"));
    s.labels = labels_from_json(j.at("labels"));
    if (!j.at("model").is_null()) s.model = model_from_json(j.at("model"));
    if (!j.at("suite").is_null()) s.suite = suite_from_json(j.at("suite"));
    if (!j.at("draw").is_null()) s.draw = draw_from_json(j.at("draw"));
    for (const auto& r : j.at("reports")) s.reports.push_back(adequacy_from_json(r));
    if (!j.at("selection").is_null()) s.selection = selection_from_json(j.at("selection"));
    s.iteration = j.at("iteration").get<int>();
    s.max_iterations = j.at("max_iterations").get<int>();
    if (!j.at("reflection").is_null()) s.reflection = j.at("reflection").get<std::string>();
    if (!j.at("improvement_notes").is_null()) {
      s.improvement_notes = j.at("improvement_notes").get<std::string>();
    }
    for (const auto& r : j.at("audit")) {
      AuditRecord rec;
      rec.seq = r.at("seq").get<std::uint64_t>();
      rec.timestamp = r.at("timestamp").get<std::string>();
      rec.actor = r.at("actor").get<std::string>();
      auto ev = parse_event(r.at("event").get<std::string>());
      if (!ev) fail(ErrorCode::StoreCorrupt, "unknown audit event");
      rec.event = *ev;
      rec.payload = r.at("payload");
      rec.digest = r.at("digest").get<std::string>();
      s.audit.push_back(std::move(rec));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::StoreCorrupt, std::string("session document: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::StoreCorrupt) throw;
    fail(ErrorCode::StoreCorrupt, std::string("session document: ") + e.what());
  }
}

std::string session_digest(const Session& s) { return hex64(fnv1a64(to_json(s).dump())); }

void verify_integrity(const Session& s) {
  for (std::size_t i = 0; i < s.audit.size(); ++i) {
    const auto& rec = s.audit[i];
    if (rec.seq != i + 1) {
      fail(ErrorCode::StoreCorrupt, "audit record " + std::to_string(i + 1) + " is out of sequence");
    }
    if (record_digest(rec) != rec.digest) {
      fail(ErrorCode::StoreCorrupt, "audit record " + std::to_string(rec.seq) + " digest mismatch");
    }
  }
  Session rebuilt;
  try {
    rebuilt = replay(s.id, s.max_iterations, s.audit);
  } catch (const Error& e) {
    fail(ErrorCode::StoreCorrupt, std::string("audit replay failed: ") + e.what());
  }
  if (!(rebuilt == s)) {
    fail(ErrorCode::StoreCorrupt, "session fields disagree with the replayed audit trail");
  }
}

}  // namespace rts
