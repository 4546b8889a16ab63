#include <cmath>

#include <doctest.h>

#include "helpers.hpp"
#include "rts/features.hpp"

using namespace rts;
using testutil::run;
using testutil::small_dataset;
using testutil::test_case;

namespace {

FeatureScope only(const std::string& release, const std::string& keep) {
  FeatureScope s;
  s.target_release = release;
  for (auto g : {group::kDescText, group::kRequirements, group::kDefects,
                 group::kChangedRequirements, group::kHistFailRate, group::kTags}) {
    if (g != keep) s.deselected_groups.insert(std::string(g));
  }
  return s;
}

Dataset two_login_tests() {
  Dataset d;
  d.releases = {"R1"};
  d.tests = {test_case("A", "login fails", {run("R1", Verdict::Pass)}),
             test_case("B", "login works", {run("R1", Verdict::Pass)})};
  return d;
}

}  // namespace

TEST_CASE("tokenizer") {
  CHECK(tokenize("Login-Timeout, a 42x!") == std::vector<std::string>{"login", "timeout", "42x"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("a b c").empty());
  CHECK(tokenize("Größe über") == std::vector<std::string>{"größe", "über"});
  CHECK(tokenize("é").empty());  // one code point, two bytes
  CHECK(tokenize("éé") == std::vector<std::string>{"éé"});
}

TEST_CASE("catalog has the six groups in fixed order") {
  const FeatureCatalog c = build_catalog(small_dataset(), "R2");
  REQUIRE(c.groups.size() == 6);
  const std::vector<std::string> names = {"desc_text", "n_requirements", "n_defects",
                                          "n_changed_requirements", "hist_fail_rate", "tags"};
  for (std::size_t i = 0; i < 6; ++i) CHECK(c.groups[i].name == names[i]);
  CHECK(c.groups[0].kind == FeatureKind::TextTfidf);
  CHECK(c.groups[5].kind == FeatureKind::Categorical);
  CHECK(c.groups[5].columns == 2);
}

TEST_CASE("catalog without tags keeps an empty tags group") {
  Dataset d = two_login_tests();
  const FeatureCatalog c = build_catalog(d, "R1");
  REQUIRE(c.contains("tags"));
  CHECK(c.groups[5].columns == 0);
}

TEST_CASE("catalog for unknown release") {
  CHECK_RTS_ERROR(build_catalog(small_dataset(), "R9"), ErrorCode::UnknownRelease);
}

TEST_CASE("tf-idf of the login example") {
  const FeatureMatrix m = extract_features(two_login_tests(), only("R1", "desc_text"));
  REQUIRE(m.vocabulary.contains("login"));
  const auto col = m.vocabulary.at("login").column;
  CHECK(m.vocabulary.at("login").document_frequency == 2);
  CHECK(m.rows[0].at(col) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.rows[1].at(col) == doctest::Approx(0.5).epsilon(1e-15));
  // "fails": df=1, idf = ln(3/2)+1, tf = 1/2
  const auto fails = m.vocabulary.at("fails").column;
  CHECK(m.rows[0].at(fails) == doctest::Approx(0.5 * (std::log(1.5) + 1.0)));
  CHECK(m.rows[1].at(fails) == 0.0);
  CHECK(m.column_names == std::vector<std::string>{"desc_text:fails", "desc_text:login",
                                                   "desc_text:works"});
}

TEST_CASE("empty text gives a zero text block") {
  Dataset d = two_login_tests();
  d.tests.push_back(test_case("C", "", {run("R1", Verdict::Pass)}));
  const FeatureMatrix m = extract_features(d, only("R1", "desc_text"));
  CHECK(m.rows[2].nonzeros() == 0);
}

TEST_CASE("scope keeping only n_defects") {
  const FeatureMatrix m = extract_features(small_dataset(), only("R2", "n_defects"));
  CHECK(m.column_names == std::vector<std::string>{"n_defects"});
  for (const auto& r : m.rows) CHECK(r.to_dense(1).size() == 1);
}

TEST_CASE("matrix invariants") {
  const FeatureMatrix m = extract_features(small_dataset(), FeatureScope{"R3", {}});
  CHECK(m.rows.size() == m.test_ids.size());
  for (const auto& row : m.rows) {
    for (std::size_t i = 0; i < row.nonzeros(); ++i) {
      CHECK(row.indices()[i] < m.dimension());
      CHECK(std::isfinite(row.values()[i]));
      if (i > 0) CHECK(row.indices()[i - 1] < row.indices()[i]);
    }
  }
  for (const auto& col : m.numeric) {
    for (const auto& row : m.rows) {
      CHECK(row.at(col.column) >= 0.0);
      CHECK(row.at(col.column) <= 1.0);
    }
  }
  // groups appear in catalog order
  CHECK(m.column_names.back() == "tags:ui");
  CHECK(std::find(m.column_names.begin(), m.column_names.end(), "hist_fail_rate") !=
        m.column_names.end());
}

TEST_CASE("numeric features against hand values") {
  const FeatureMatrix m = extract_features(small_dataset(), FeatureScope{"R3", {"desc_text", "tags"}});
  REQUIRE(m.column_names == std::vector<std::string>{"n_requirements", "n_defects",
                                                     "n_changed_requirements", "hist_fail_rate"});
  // T1: 1 req, 1 defect, 0 changed at R3, fail rate 1/2; T3: 2 req, 0 defects, rate 0
  auto dense = [&](std::size_t i) { return m.rows[i].to_dense(4); };
  CHECK(dense(0) == std::vector<double>{0.0, 1.0, 0.0, 1.0});
  CHECK(dense(1) == std::vector<double>{0.0, 1.0, 0.0, 1.0});
  CHECK(dense(2) == std::vector<double>{1.0, 0.0, 0.0, 0.0});
  // at R2, REQ-1 changed: T1 and T3 link it
  const FeatureMatrix m2 = extract_features(small_dataset(), only("R2", "n_changed_requirements"));
  CHECK(m2.rows[0].at(0) == 1.0);
  CHECK(m2.rows[1].at(0) == 0.0);
  CHECK(m2.rows[2].at(0) == 1.0);
}

TEST_CASE("history at or after the target release is ignored") {
  const FeatureMatrix m = extract_features(small_dataset(), only("R1", "hist_fail_rate"));
  for (const auto& r : m.rows) CHECK(r.nonzeros() == 0);
}

TEST_CASE("scope errors") {
  CHECK_RTS_ERROR(extract_features(small_dataset(), FeatureScope{"R9", {}}),
                  ErrorCode::UnknownRelease);
  CHECK_RTS_ERROR(extract_features(small_dataset(), FeatureScope{"R1", {"colour"}}),
                  ErrorCode::ScopeMismatch);
  FeatureScope all = only("R1", "tags");
  all.deselected_groups.insert("tags");
  CHECK_RTS_ERROR(extract_features(small_dataset(), all), ErrorCode::ScopeMismatch);
}

TEST_CASE("unseen test identical to a row") {
  const Dataset d = small_dataset();
  const FeatureScope scope{"R3", {}};
  const FeatureMatrix m = extract_features(d, scope);
  for (std::size_t i = 0; i < d.tests.size(); ++i) {
    CHECK(vectorize_unseen(m, d.tests[i], d, scope) == m.rows[i]);
  }
}

TEST_CASE("unseen tokens give a zero text block") {
  const Dataset d = small_dataset();
  const FeatureScope scope = only("R3", "desc_text");
  const FeatureMatrix m = extract_features(d, scope);
  CHECK(vectorize_unseen(m, test_case("X", "quantum entanglement"), d, scope).nonzeros() == 0);
}

TEST_CASE("numeric values above the training max clamp to one") {
  const Dataset d = small_dataset();
  const FeatureScope scope = only("R3", "n_defects");
  const FeatureMatrix m = extract_features(d, scope);
  TestCase t = test_case("X");
  t.defect_ids = {"D-1", "D-2", "D-3", "D-4"};
  CHECK(vectorize_unseen(m, t, d, scope).at(0) == 1.0);
  CHECK_RTS_ERROR(vectorize_unseen(m, t, d, FeatureScope{"R3", {}}), ErrorCode::ScopeMismatch);
}

TEST_CASE("constant numeric column") {
  NumericColumn c{"n_defects", 0, 2.0, 2.0};
  CHECK(c.scale(2.0) == 0.0);
  CHECK(c.scale(3.0) == 1.0);
  CHECK(c.scale(1.0) == 0.0);
  NumericColumn r{"n_defects", 0, 1.0, 3.0};
  CHECK(r.scale(2.0) == 0.5);
  CHECK(r.scale(-5.0) == 0.0);
}

TEST_CASE("sparse vector") {
  SparseVector v;
  v.push(1, 2.0);
  v.push(3, 0.0);
  v.push(4, -1.0);
  CHECK(v.nonzeros() == 2);
  const std::vector<double> w = {10, 20, 30, 40, 50};
  CHECK(v.dot(w) == 2.0 * 20 - 50);
  CHECK(v.to_dense(5) == std::vector<double>{0, 2, 0, 0, -1});
  CHECK(v.at(3) == 0.0);
}
