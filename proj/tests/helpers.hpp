#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <doctest.h>

#include "rts/datamodel.hpp"
#include "rts/error.hpp"

namespace testutil {

// Checks that `expr` throws rts::Error with the given code.
#define CHECK_RTS_ERROR(expr, ecode)                                   \
  do {                                                                 \
    bool thrown_ = false;                                              \
    try {                                                              \
      (void)(expr);                                                    \
    } catch (const rts::Error& e_) {                                   \
      thrown_ = true;                                                  \
      CHECK_MESSAGE(e_.code() == (ecode), rts::to_string(e_.code()), " ", e_.what()); \
    }                                                                  \
    CHECK_MESSAGE(thrown_, "expected " #ecode " from " #expr);         \
  } while (0)

inline rts::HistoryEntry run(const std::string& release, rts::Verdict v,
                             std::vector<std::string> revealed = {}) {
  rts::HistoryEntry h;
  h.release = release;
  h.verdict = v;
  h.executed = v != rts::Verdict::Skipped;
  h.revealed_defect_ids = std::move(revealed);
  return h;
}

inline rts::TestCase test_case(const std::string& id, const std::string& description = "",
                               std::vector<rts::HistoryEntry> history = {}) {
  rts::TestCase t;
  t.id = id;
  t.description = description;
  t.history = std::move(history);
  return t;
}

// Small consistent dataset: three releases, requirements, defects, history.
inline rts::Dataset small_dataset() {
  using rts::Verdict;
  rts::Dataset d;
  d.project = "demo";
  d.releases = {"R1", "R2", "R3"};
  d.requirements = {{"REQ-1", "Login", "", {"R2"}}, {"REQ-2", "Reports", "", {}}};
  d.defects = {{"D-1", "Crash", 2, "R1"}, {"D-2", "Hang", 1, "R2"}};
  auto t1 = test_case("T1", "login timeout after migration",
                      {run("R1", Verdict::Fail, {"D-1"}), run("R2", Verdict::Pass)});
  t1.requirement_ids = {"REQ-1"};
  t1.defect_ids = {"D-1"};
  t1.tags = {"ui"};
  auto t2 = test_case("T2", "report export works",
                      {run("R1", Verdict::Pass), run("R2", Verdict::Fail, {"D-2"})});
  t2.requirement_ids = {"REQ-2"};
  t2.defect_ids = {"D-2"};
  t2.tags = {"backend"};
  auto t3 = test_case("T3", "search display", {run("R1", Verdict::Pass), run("R2", Verdict::Pass)});
  t3.requirement_ids = {"REQ-1", "REQ-2"};
  d.tests = {t1, t2, t3};
  return d;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  static std::mt19937_64 gen{std::random_device{}()};
  auto p = std::filesystem::temp_directory_path() /
           ("rts-test-" + name + "-" + std::to_string(gen()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testutil
