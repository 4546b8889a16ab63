#include <doctest.h>

#include "helpers.hpp"
#include "rts/session.hpp"
#include "session_driver.hpp"

using namespace rts;

TEST_CASE("transition table sweep") {
  const auto result = driver::sweep();
  CHECK(result.pairs == std::size(kAllStates) * std::size(kAllEvents));
  for (const auto& f : result.failures) MESSAGE("mismatch: ", f);
  CHECK(result.mismatches == 0);
}

TEST_CASE("load data") {
  const Session s = transition(new_session("a"), {EventKind::LoadData, {{"dataset_ref", "d42"}}});
  CHECK(s.state == SessionState::DataLoaded);
  CHECK(s.dataset_ref == "d42");
  REQUIRE(s.audit.size() == 1);
  CHECK(s.audit[0].seq == 1);
  CHECK(s.audit[0].actor == "test-manager");
  CHECK(s.audit[0].digest == record_digest(s.audit[0]));
  CHECK(s.audit[0].digest.size() == 16);
}

TEST_CASE("accept straight after training is illegal and leaves the session alone") {
  const Session s = driver::session_in(SessionState::Trained);
  const Session copy = s;
  try {
    transition(s, {EventKind::Accept, {{"selection", nlohmann::json::object()}}});
    FAIL("expected IllegalTransition");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IllegalTransition);
    const std::string msg = e.what();
    CHECK(msg.find("Trained") != std::string::npos);
    CHECK(msg.find("Accept") != std::string::npos);
  }
  CHECK(s == copy);
}

TEST_CASE("iterate keeps labels and counts") {
  const Session s = driver::session_in(SessionState::Assessed);
  const Session it = transition(s, {EventKind::Iterate});
  CHECK(it.state == SessionState::Iterating);
  CHECK(it.iteration == s.iteration + 1);
  CHECK(it.labels == s.labels);
  CHECK(it.reports == s.reports);

  // new training labels start a fresh ranking
  rts::SplitMix64 rng(3);
  const Session relabeled = transition(it, *driver::good_event(it, EventKind::LabelTraining, rng));
  CHECK(relabeled.state == SessionState::TrainingLabeled);
  CHECK(relabeled.labels.entries.size() == s.labels.entries.size() + 1);
  CHECK_FALSE(relabeled.model.has_value());
  CHECK_FALSE(relabeled.suite.has_value());
}

TEST_CASE("iteration limit") {
  Session s = driver::session_in(SessionState::Assessed, 0);
  CHECK_RTS_ERROR(transition(s, {EventKind::Iterate}), ErrorCode::IterationLimit);
  s.reports.back().verdict = Adequacy::Inadequate;
  CHECK(available_decisions(s) == std::vector<std::string>{"abort", "accept"});
  s.reports.back().verdict = Adequacy::Adequate;
  CHECK(available_decisions(s) == std::vector<std::string>{"accept", "abort"});
  const Session fresh = driver::session_in(SessionState::Assessed, 5);
  CHECK(available_decisions(fresh) == std::vector<std::string>{"accept", "iterate", "abort"});
  CHECK(available_decisions(driver::session_in(SessionState::Trained)).empty());
}

TEST_CASE("post-test recording") {
  const Session acc = driver::session_in(SessionState::Accepted);
  const Session done = record_posttest(acc, "smooth", "none");
  CHECK(done.state == SessionState::PostTestRecorded);
  CHECK(*done.reflection == "smooth");
  CHECK_RTS_ERROR(record_posttest(driver::session_in(SessionState::Trained), "a", "b"),
                  ErrorCode::IllegalTransition);
  const std::string notes = "Descriptions of 40% of tests are empty; requirement links missing for T17.";
  const Session ab = record_posttest(driver::session_in(SessionState::Aborted), "", notes);
  CHECK(ab.state == SessionState::PostTestRecorded);
  CHECK(*ab.improvement_notes == notes);
  CHECK(session_from_json(to_json(ab)) == ab);
}

TEST_CASE("payload errors") {
  const Session created = new_session("p");
  CHECK_RTS_ERROR(transition(created, {EventKind::LoadData}), ErrorCode::PayloadInvalid);
  CHECK_RTS_ERROR(transition(created, {EventKind::LoadData, {{"dataset_ref", 7}}}),
                  ErrorCode::PayloadInvalid);
  const Session scoped = driver::session_in(SessionState::FeaturesScoped);
  // verification labels are not training labels
  CHECK_RTS_ERROR(
      transition(scoped, {EventKind::LabelTraining,
                          {{"entries", {{{"test_id", "X"}, {"label", "in"}, {"role", "verification"}}}}}}),
      ErrorCode::PayloadInvalid);
  CHECK_RTS_ERROR(transition(scoped, {EventKind::LabelTraining, {{"entries", nlohmann::json::array()}}}),
                  ErrorCode::PayloadInvalid);
  const Session trained = driver::session_in(SessionState::Trained);
  CHECK_RTS_ERROR(
      transition(trained, {EventKind::LabelVerification,
                           {{"entries", {{{"test_id", "nope"}, {"label", "in"}, {"role", "verification"}}}}}}),
      ErrorCode::UnknownTestId);
  // relabel must change the label
  const Session tl = driver::session_in(SessionState::TrainingLabeled);
  const auto& e = tl.labels.entries[0];
  CHECK_RTS_ERROR(transition(tl, {EventKind::Relabel,
                                  {{"test_id", e.test_id}, {"label", to_string(e.label)}}}),
                  ErrorCode::PayloadInvalid);
  CHECK_RTS_ERROR(transition(tl, {EventKind::Relabel, {{"test_id", "ghost"}, {"label", "in"}}}),
                  ErrorCode::UnknownTestId);
}

TEST_CASE("verification labels can be promoted to training") {
  const Session vl = driver::session_in(SessionState::VerificationLabeled);
  const LabelEntry* v = nullptr;
  for (const auto& e : vl.labels.entries) {
    if (e.role == Role::Verification) v = &e;
  }
  REQUIRE(v);
  SplitMix64 rng(1);
  Session s = transition(vl, *driver::good_event(vl, EventKind::Assess, rng));
  s = transition(s, {EventKind::Iterate});
  const Session promoted = transition(
      s, {EventKind::LabelTraining,
          {{"entries", {{{"test_id", v->test_id}, {"label", to_string(v->label)}, {"role", "training"}}}}}});
  CHECK(promoted.labels.find(v->test_id)->role == Role::Training);
  CHECK(promoted.labels.entries.size() == vl.labels.entries.size());
  const std::string flipped = v->label == Label::In ? "out" : "in";
  CHECK_RTS_ERROR(
      transition(s, {EventKind::LabelTraining,
                     {{"entries", {{{"test_id", v->test_id}, {"label", flipped}, {"role", "training"}}}}}}),
      ErrorCode::PayloadInvalid);
}

TEST_CASE("training ids may not appear in the ranked suite") {
  const Session tl = driver::session_in(SessionState::TrainingLabeled);
  const std::string id = tl.labels.entries[0].test_id;
  nlohmann::json suite = to_json(make_suite({{id, 0.5}, {"S1", 0.4}}));
  RankModel m{{0.0}, 0.0, {"a"}, {}};
  CHECK_RTS_ERROR(transition(tl, {EventKind::Train, {{"model", to_json(m)}, {"suite", suite}}}),
                  ErrorCode::PayloadInvalid);
}

TEST_CASE("random walks replay to the same session") {
  std::set<SessionState> reached;
  int iterated = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Session s = driver::random_walk(seed, 40, 2);
    reached.insert(s.state);
    iterated += s.iteration > 0;
    CHECK(replay(s.id, s.max_iterations, s.audit) == s);
    CHECK_NOTHROW(verify_integrity(s));
    CHECK(session_from_json(to_json(s)) == s);
    CHECK(s.iteration <= s.max_iterations);
    for (std::size_t i = 0; i < s.audit.size(); ++i) CHECK(s.audit[i].seq == i + 1);
    if (s.selection) {
      CHECK((s.state == SessionState::Accepted || s.state == SessionState::PostTestRecorded));
    }
  }
  // the walks cover the late states and the iteration loop
  CHECK(reached.contains(SessionState::PostTestRecorded));
  CHECK(iterated > 5);
}

TEST_CASE("tampering is detected") {
  const Session s = driver::random_walk(7, 20, 3);
  REQUIRE(s.audit.size() > 3);
  Session bad = s;
  bad.audit[1].actor = "mallory";
  CHECK_RTS_ERROR(verify_integrity(bad), ErrorCode::StoreCorrupt);
  bad = s;
  bad.audit[2].digest[0] = bad.audit[2].digest[0] == 'a' ? 'b' : 'a';
  CHECK_RTS_ERROR(verify_integrity(bad), ErrorCode::StoreCorrupt);
  bad = s;
  bad.iteration += 1;  // field disagrees with the audit trail
  CHECK_RTS_ERROR(verify_integrity(bad), ErrorCode::StoreCorrupt);
  bad = s;
  bad.audit.erase(bad.audit.begin() + 1);
  CHECK_RTS_ERROR(verify_integrity(bad), ErrorCode::StoreCorrupt);
}

TEST_CASE("fnv-1a reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("state and event names round-trip") {
  for (auto s : kAllStates) CHECK(parse_state(to_string(s)) == s);
  for (auto e : kAllEvents) CHECK(parse_event(to_string(e)) == e);
  CHECK_FALSE(parse_state("Sleeping"));
}
