#include "rts/features.hpp"

#include <algorithm>
#include <cmath>

#include "rts/error.hpp"

namespace rts {

std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::TextTfidf: return "text_tfidf";
    case FeatureKind::Numeric: return "numeric";
    case FeatureKind::Categorical: return "categorical";
  }
  return "numeric";
}

bool FeatureCatalog::contains(std::string_view name) const {
  return std::any_of(groups.begin(), groups.end(),
                     [&](const FeatureGroup& g) { return g.name == name; });
}

bool FeatureScope::selected(std::string_view group) const {
  return !deselected_groups.contains(std::string(group));
}

void SparseVector::push(std::uint32_t index, double value) {
  if (value == 0.0) return;
  index_.push_back(index);
  value_.push_back(value);
}

double SparseVector::dot(std::span<const double> dense) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < index_.size(); ++i) sum += value_[i] * dense[index_[i]];
  return sum;
}

double SparseVector::at(std::uint32_t index) const {
  auto it = std::lower_bound(index_.begin(), index_.end(), index);
  if (it == index_.end() || *it != index) return 0.0;
  return value_[static_cast<std::size_t>(it - index_.begin())];
}

std::vector<double> SparseVector::to_dense(std::size_t dimension) const {
  std::vector<double> out(dimension, 0.0);
  for (std::size_t i = 0; i < index_.size(); ++i) out[index_[i]] = value_[i];
  return out;
}

double NumericColumn::scale(double raw) const {
  const double range = max - min;
  if (!(range > 0.0)) return raw > max ? 1.0 : 0.0;
  return std::clamp((raw - min) / range, 0.0, 1.0);
}

std::optional<std::size_t> FeatureMatrix::row_index(std::string_view test_id) const {
  auto it = std::find(test_ids.begin(), test_ids.end(), test_id);
  if (it == test_ids.end()) return std::nullopt;
  return static_cast<std::size_t>(it - test_ids.begin());
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t chars = 0;
  auto flush = [&] {
    if (chars >= 2) tokens.push_back(current);
    current.clear();
    chars = 0;
  };
  for (unsigned char c : text) {
    const bool ascii_alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
                             (c >= 'A' && c <= 'Z');
    if (ascii_alnum || c >= 0x80) {
      current.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c + ('a' - 'A') : c));
      if ((c & 0xC0) != 0x80) ++chars;  // UTF-8 continuation bytes are not characters
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

namespace {

const std::string_view kNumericGroups[] = {group::kRequirements, group::kDefects,
                                           group::kChangedRequirements, group::kHistFailRate};

struct RawTest {
  std::map<std::string, std::size_t> term_counts;
  std::size_t token_total = 0;
  double numeric[4] = {0, 0, 0, 0};
  std::set<std::string> tags;
};

std::size_t unique_count(const std::vector<std::string>& ids) {
  return std::set<std::string>(ids.begin(), ids.end()).size();
}

RawTest raw_features(const TestCase& t, const Dataset& d, std::size_t target_index) {
  RawTest raw;
  std::string text = t.title;
  text.push_back(' ');
  text += t.description;
  for (auto& tok : tokenize(text)) {
    ++raw.term_counts[std::move(tok)];
    ++raw.token_total;
  }

  raw.numeric[0] = static_cast<double>(unique_count(t.requirement_ids));
  raw.numeric[1] = static_cast<double>(unique_count(t.defect_ids));

  const std::string& target = d.releases[target_index];
  std::size_t changed = 0;
  for (const auto& rid : std::set<std::string>(t.requirement_ids.begin(), t.requirement_ids.end())) {
    auto req = std::find_if(d.requirements.begin(), d.requirements.end(),
                            [&](const Requirement& r) { return r.id == rid; });
    if (req == d.requirements.end()) continue;
    const auto& rel = req->changed_in_releases;
    if (std::find(rel.begin(), rel.end(), target) != rel.end()) ++changed;
  }
  raw.numeric[2] = static_cast<double>(changed);

  std::size_t executions = 0, fails = 0;
  for (const auto& h : t.history) {
    auto idx = d.release_index(h.release);
    if (!idx || *idx >= target_index || !h.executed) continue;
    ++executions;
    if (h.verdict == Verdict::Fail) ++fails;
  }
  raw.numeric[3] =
      executions == 0 ? 0.0 : static_cast<double>(fails) / static_cast<double>(executions);

  raw.tags.insert(t.tags.begin(), t.tags.end());
  return raw;
}

double idf(std::size_t documents, std::size_t df) {
  return std::log(static_cast<double>(1 + documents) / static_cast<double>(1 + df)) + 1.0;
}

std::size_t target_index(const Dataset& d, std::string_view release) {
  auto idx = d.release_index(release);
  if (!idx) fail(ErrorCode::UnknownRelease, "unknown release '" + std::string(release) + "'");
  return *idx;
}

// Fills the selected groups of one row, in column order.
SparseVector assemble(const FeatureMatrix& m, const RawTest& raw) {
  SparseVector row;
  if (m.scope.selected(group::kDescText) && raw.token_total > 0) {
    const double total = static_cast<double>(raw.token_total);
    for (const auto& [term, count] : raw.term_counts) {  // map order == column order
      auto it = m.vocabulary.find(term);
      if (it == m.vocabulary.end()) continue;
      const double tf = static_cast<double>(count) / total;
      row.push(it->second.column, tf * idf(m.documents, it->second.document_frequency));
    }
  }
  for (const auto& col : m.numeric) {
    const auto slot = static_cast<std::size_t>(
        std::find(std::begin(kNumericGroups), std::end(kNumericGroups), col.group) -
        std::begin(kNumericGroups));
    row.push(col.column, col.scale(raw.numeric[slot]));
  }
  for (const auto& tag : raw.tags) {
    auto it = m.tag_columns.find(tag);
    if (it != m.tag_columns.end()) row.push(it->second, 1.0);
  }
  return row;
}

}  // namespace

FeatureCatalog build_catalog(const Dataset& d, std::string_view target_release) {
  target_index(d, target_release);
  std::set<std::string> terms, tags;
  for (const auto& t : d.tests) {
    for (auto& tok : tokenize(t.title + " " + t.description)) terms.insert(std::move(tok));
    tags.insert(t.tags.begin(), t.tags.end());
  }
  FeatureCatalog c;
  c.groups.push_back({std::string(group::kDescText), FeatureKind::TextTfidf,
                      "title+description", terms.size()});
  c.groups.push_back(
      {std::string(group::kRequirements), FeatureKind::Numeric, "requirement_ids", 1});
  c.groups.push_back({std::string(group::kDefects), FeatureKind::Numeric, "defect_ids", 1});
  c.groups.push_back({std::string(group::kChangedRequirements), FeatureKind::Numeric,
                      "requirement_ids+changed_in_releases", 1});
  c.groups.push_back({std::string(group::kHistFailRate), FeatureKind::Numeric, "history", 1});
  c.groups.push_back({std::string(group::kTags), FeatureKind::Categorical, "tags", tags.size()});
  return c;
}

void check_scope(const Dataset& d, const FeatureScope& scope) {
  const FeatureCatalog catalog = build_catalog(d, scope.target_release);
  for (const auto& name : scope.deselected_groups) {
    if (!catalog.contains(name)) {
      fail(ErrorCode::ScopeMismatch, "deselected group '" + name + "' is not in the catalog");
    }
  }
  if (scope.deselected_groups.size() >= catalog.groups.size()) {
    fail(ErrorCode::ScopeMismatch, "at least one feature group must stay selected");
  }
}

FeatureMatrix extract_features(const Dataset& d, const FeatureScope& scope) {
  check_scope(d, scope);
  const std::size_t target = target_index(d, scope.target_release);

  std::vector<RawTest> raws;
  raws.reserve(d.tests.size());
  for (const auto& t : d.tests) raws.push_back(raw_features(t, d, target));

  FeatureMatrix m;
  m.scope = scope;
  m.documents = d.tests.size();
  for (const auto& t : d.tests) m.test_ids.push_back(t.id);

  auto next_column = [&m](std::string name) {
    m.column_names.push_back(std::move(name));
    return static_cast<std::uint32_t>(m.column_names.size() - 1);
  };

  if (scope.selected(group::kDescText)) {
    std::map<std::string, std::size_t> df;
    for (const auto& raw : raws) {
      for (const auto& [term, count] : raw.term_counts) ++df[term];
    }
    for (const auto& [term, freq] : df) {
      m.vocabulary[term] = {next_column(std::string(group::kDescText) + ":" + term), freq};
    }
  }
  for (std::size_t g = 0; g < std::size(kNumericGroups); ++g) {
    if (!scope.selected(kNumericGroups[g])) continue;
    NumericColumn col;
    col.group = std::string(kNumericGroups[g]);
    col.column = next_column(col.group);
    if (!raws.empty()) {
      auto [lo, hi] = std::minmax_element(raws.begin(), raws.end(), [g](const auto& a, const auto& b) {
        return a.numeric[g] < b.numeric[g];
      });
      col.min = lo->numeric[g];
      col.max = hi->numeric[g];
    }
    m.numeric.push_back(std::move(col));
  }
  if (scope.selected(group::kTags)) {
    std::set<std::string> tags;
    for (const auto& raw : raws) tags.insert(raw.tags.begin(), raw.tags.end());
    for (const auto& tag : tags) {
      m.tag_columns[tag] = next_column(std::string(group::kTags) + ":" + tag);
    }
  }

  m.rows.reserve(raws.size());
  for (const auto& raw : raws) m.rows.push_back(assemble(m, raw));
  return m;
}

SparseVector vectorize_unseen(const FeatureMatrix& matrix, const TestCase& t, const Dataset& d,
                              const FeatureScope& scope) {
  if (!(scope == matrix.scope)) {
    fail(ErrorCode::ScopeMismatch, "scope differs from the one the feature matrix was built with");
  }
  return assemble(matrix, raw_features(t, d, target_index(d, scope.target_release)));
}

}  // namespace rts
