#pragma once

// Builds well-formed workflow events for arbitrary sessions, so transition
// tables can be exercised without running the whole ranking pipeline.
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rts/rng.hpp"
#include "rts/serialize.hpp"
#include "rts/session.hpp"

namespace driver {

using rts::EventKind;
using rts::SessionState;

// Legal (state, event) -> target pairs, written out by hand.
inline std::map<std::pair<SessionState, EventKind>, SessionState> legal_table() {
  using S = SessionState;
  using E = EventKind;
  return {
      {{S::Created, E::LoadData}, S::DataLoaded},
      {{S::DataLoaded, E::ScopeFeatures}, S::FeaturesScoped},
      {{S::FeaturesScoped, E::LabelTraining}, S::TrainingLabeled},
      {{S::TrainingLabeled, E::Train}, S::Trained},
      {{S::Trained, E::LabelVerification}, S::VerificationLabeled},
      {{S::VerificationLabeled, E::Assess}, S::Assessed},
      {{S::Assessed, E::Accept}, S::Accepted},
      {{S::Assessed, E::Iterate}, S::Iterating},
      {{S::Assessed, E::Abort}, S::Aborted},
      {{S::Iterating, E::LabelTraining}, S::TrainingLabeled},
      {{S::Accepted, E::RecordPostTest}, S::PostTestRecorded},
      {{S::Aborted, E::RecordPostTest}, S::PostTestRecorded},
      // self-loops
      {{S::Trained, E::DrawVerification}, S::Trained},
      {{S::TrainingLabeled, E::Relabel}, S::TrainingLabeled},
      {{S::Iterating, E::Relabel}, S::Iterating},
      {{S::VerificationLabeled, E::Relabel}, S::VerificationLabeled},
  };
}

inline constexpr std::size_t kSuiteSize = 40;

inline std::string suite_id(std::size_t i) { return "S" + std::to_string(i); }

// A payload that `transition` accepts for `kind` given the content of `s`.
// Returns nullopt when the session has nothing left to use (for example no
// unlabeled suite entry for a verification label).
inline std::optional<rts::Event> good_event(const rts::Session& s, EventKind kind,
                                            rts::SplitMix64& rng) {
  using nlohmann::json;
  rts::Event ev{kind, json::object(), "tester", "2026-01-01T00:00:00.000Z"};
  switch (kind) {
    case EventKind::LoadData:
      ev.payload = {{"dataset_ref", "d0001"}};
      break;
    case EventKind::ScopeFeatures:
      ev.payload = {{"scope", rts::to_json(rts::FeatureScope{"R2", {"tags"}})}};
      break;
    case EventKind::LabelTraining: {
      const std::string id = "L" + std::to_string(s.labels.entries.size() + 1) + "x" +
                             std::to_string(rng.below(1000));
      if (s.labels.find(id)) return std::nullopt;
      const auto label = rng.below(2) ? rts::Label::In : rts::Label::Out;
      ev.payload = {{"entries", json::array({rts::to_json(rts::LabelEntry{id, label, rts::Role::Training})})}};
      break;
    }
    case EventKind::Train: {
      std::vector<std::pair<std::string, double>> scored;
      for (std::size_t i = 0; i < kSuiteSize; ++i) scored.push_back({suite_id(i), rng.uniform()});
      rts::RankModel m{{rng.uniform(), -rng.uniform()}, 0.25, {"a", "b"}, {3, 0.5, 1, 1}};
      ev.payload = {{"model", rts::to_json(m)}, {"suite", rts::to_json(rts::make_suite(scored))}};
      break;
    }
    case EventKind::DrawVerification: {
      if (!s.suite || s.suite->size() < 2) return std::nullopt;
      rts::VerificationDraw d{{s.suite->entries[0].test_id, s.suite->entries[1].test_id},
                              rng.below(100), 2};
      ev.payload = {{"draw", rts::to_json(d)}};
      break;
    }
    case EventKind::LabelVerification: {
      if (!s.suite) return std::nullopt;
      std::vector<std::string> free;
      for (const auto& e : s.suite->entries) {
        if (!s.labels.find(e.test_id)) free.push_back(e.test_id);
      }
      if (free.empty()) return std::nullopt;
      const std::string id = free[rng.below(free.size())];
      const auto label = rng.below(2) ? rts::Label::In : rts::Label::Out;
      ev.payload = {{"entries", json::array({rts::to_json(rts::LabelEntry{id, label, rts::Role::Verification})})}};
      break;
    }
    case EventKind::Assess: {
      rts::AdequacyReport r;
      r.overlapping_pairs = rng.below(3);
      r.total_pairs = 4;
      r.pair_overlap = static_cast<double>(r.overlapping_pairs) / 4.0;
      r.pair_auc = 1.0 - r.pair_overlap;
      r.separated = r.overlapping_pairs == 0;
      if (r.separated) r.interval_d = rts::RankInterval{2, 3};
      r.verdict = r.separated ? rts::Adequacy::Adequate : rts::Adequacy::Inadequate;
      r.in_labels = 2;
      r.out_labels = 2;
      r.small_sample = true;
      ev.payload = {{"report", rts::to_json(r)}};
      break;
    }
    case EventKind::Accept: {
      if (!s.suite || s.suite->empty()) return std::nullopt;
      rts::SelectionResult sel{1, s.suite->entries[0].test_id, {s.suite->entries[0].test_id}, {}, false};
      for (std::size_t i = 1; i < s.suite->size(); ++i) sel.excluded_ids.push_back(s.suite->entries[i].test_id);
      ev.payload = {{"selection", rts::to_json(sel)}};
      break;
    }
    case EventKind::Iterate:
      break;
    case EventKind::Abort:
      ev.payload = {{"reason", "not good enough"}};
      break;
    case EventKind::RecordPostTest:
      ev.payload = {{"reflection", "went fine"}, {"improvement_notes", "clean up descriptions"}};
      break;
    case EventKind::Relabel: {
      if (s.labels.entries.empty()) return std::nullopt;
      const auto& e = s.labels.entries[rng.below(s.labels.entries.size())];
      ev.payload = {{"test_id", e.test_id},
                    {"label", e.label == rts::Label::In ? "out" : "in"}};
      break;
    }
  }
  return ev;
}

// Drives a new session along the shortest path into `target`.
inline rts::Session session_in(SessionState target, int max_iterations = 5) {
  using S = SessionState;
  using E = EventKind;
  std::vector<E> path;
  switch (target) {
    case S::Created: break;
    case S::DataLoaded: path = {E::LoadData}; break;
    case S::FeaturesScoped: path = {E::LoadData, E::ScopeFeatures}; break;
    case S::TrainingLabeled: path = {E::LoadData, E::ScopeFeatures, E::LabelTraining}; break;
    case S::Trained: path = {E::LoadData, E::ScopeFeatures, E::LabelTraining, E::Train}; break;
    case S::VerificationLabeled:
      path = {E::LoadData, E::ScopeFeatures, E::LabelTraining, E::Train, E::LabelVerification};
      break;
    case S::Assessed:
    case S::Accepted:
    case S::Iterating:
    case S::Aborted:
    case S::PostTestRecorded:
      path = {E::LoadData, E::ScopeFeatures, E::LabelTraining, E::Train, E::LabelVerification,
              E::Assess};
      if (target == S::Accepted) path.push_back(E::Accept);
      if (target == S::Iterating) path.push_back(E::Iterate);
      if (target == S::Aborted) path.push_back(E::Abort);
      if (target == S::PostTestRecorded) path.insert(path.end(), {E::Accept, E::RecordPostTest});
      break;
  }
  rts::SplitMix64 rng(static_cast<std::uint64_t>(target) + 1);
  rts::Session s = rts::new_session("sweep", max_iterations);
  for (E e : path) s = rts::transition(s, *good_event(s, e, rng));
  return s;
}

struct SweepResult {
  std::size_t pairs = 0;
  std::size_t mismatches = 0;
  std::vector<std::string> failures;
};

// Applies every event in every state and compares against legal_table().
inline SweepResult sweep() {
  SweepResult out;
  const auto table = legal_table();
  rts::SplitMix64 rng(1);
  for (SessionState st : rts::kAllStates) {
    const rts::Session s = session_in(st);
    for (EventKind ev : rts::kAllEvents) {
      ++out.pairs;
      const auto it = table.find({st, ev});
      const std::string pair = std::string(rts::to_string(st)) + " + " + std::string(rts::to_string(ev));
      const auto declared = rts::next_state(st, ev);
      const bool legal = it != table.end();
      bool ok = declared.has_value() == legal && (!legal || *declared == it->second);
      auto event = good_event(s, ev, rng);
      if (!event) event = rts::Event{ev, nlohmann::json::object()};
      try {
        const rts::Session next = rts::transition(s, *event);
        ok = ok && legal && next.state == it->second && next.audit.size() == s.audit.size() + 1;
      } catch (const rts::Error& e) {
        ok = ok && !legal && e.code() == rts::ErrorCode::IllegalTransition;
      }
      if (!ok) {
        ++out.mismatches;
        out.failures.push_back(pair);
      }
    }
  }
  return out;
}

// Random legal walk of up to `steps` events.
inline rts::Session random_walk(std::uint64_t seed, std::size_t steps, int max_iterations) {
  rts::SplitMix64 rng(seed);
  rts::Session s = rts::new_session("walk" + std::to_string(seed), max_iterations);
  for (std::size_t i = 0; i < steps; ++i) {
    std::vector<EventKind> options;
    for (EventKind ev : rts::kAllEvents) {
      if (rts::next_state(s.state, ev)) options.push_back(ev);
    }
    if (options.empty()) break;
    const EventKind ev = options[rng.below(options.size())];
    auto event = good_event(s, ev, rng);
    if (!event) continue;
    try {
      s = rts::transition(s, *event);
    } catch (const rts::Error& e) {
      if (e.code() != rts::ErrorCode::IterationLimit) throw;
    }
  }
  return s;
}

}  // namespace driver
