#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rts/datamodel.hpp"

namespace rts {

enum class FeatureKind { TextTfidf, Numeric, Categorical };

std::string_view to_string(FeatureKind k);

struct FeatureGroup {
  std::string name;
  FeatureKind kind;
  std::string source;
  std::size_t columns = 0;  // width this group contributes when selected

  bool operator==(const FeatureGroup&) const = default;
};

namespace group {
inline constexpr std::string_view kDescText = "desc_text";
inline constexpr std::string_view kRequirements = "n_requirements";
inline constexpr std::string_view kDefects = "n_defects";
inline constexpr std::string_view kChangedRequirements = "n_changed_requirements";
inline constexpr std::string_view kHistFailRate = "hist_fail_rate";
inline constexpr std::string_view kTags = "tags";
}  // namespace group

struct FeatureCatalog {
  std::vector<FeatureGroup> groups;

  bool contains(std::string_view name) const;
  bool operator==(const FeatureCatalog&) const = default;
};

struct FeatureScope {
  std::string target_release;
  std::set<std::string> deselected_groups;

  bool selected(std::string_view group) const;
  bool operator==(const FeatureScope&) const = default;
};

class SparseVector {
 public:
  SparseVector() = default;

  // Indices must be pushed in increasing order; zeros are dropped.
  void push(std::uint32_t index, double value);

  double dot(std::span<const double> dense) const;
  double at(std::uint32_t index) const;
  std::vector<double> to_dense(std::size_t dimension) const;

  std::span<const std::uint32_t> indices() const { return index_; }
  std::span<const double> values() const { return value_; }
  std::size_t nonzeros() const { return index_.size(); }

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<std::uint32_t> index_;
  std::vector<double> value_;
};

struct TermStats {
  std::uint32_t column = 0;
  std::size_t document_frequency = 0;

  bool operator==(const TermStats&) const = default;
};

struct NumericColumn {
  std::string group;
  std::uint32_t column = 0;
  double min = 0.0;
  double max = 0.0;

  // Min-max scaling with values outside the stored range clamped to [0, 1].
  double scale(double raw) const;
  bool operator==(const NumericColumn&) const = default;
};

struct FeatureMatrix {
  FeatureScope scope;
  std::vector<std::string> test_ids;
  std::vector<std::string> column_names;
  std::vector<SparseVector> rows;

  // Frozen state reused when vectorizing tests at inference time.
  std::size_t documents = 0;
  std::map<std::string, TermStats> vocabulary;
  std::vector<NumericColumn> numeric;
  std::map<std::string, std::uint32_t> tag_columns;

  std::size_t dimension() const { return column_names.size(); }
  std::optional<std::size_t> row_index(std::string_view test_id) const;

  bool operator==(const FeatureMatrix&) const = default;
};

// Lowercased alphanumeric tokens of at least two characters. Bytes outside
// ASCII are kept as token characters so accented words stay whole.
std::vector<std::string> tokenize(std::string_view text);

FeatureCatalog build_catalog(const Dataset& d, std::string_view target_release);

// Throws UnknownRelease or ScopeMismatch when `scope` does not fit `d`.
void check_scope(const Dataset& d, const FeatureScope& scope);

FeatureMatrix extract_features(const Dataset& d, const FeatureScope& scope);

SparseVector vectorize_unseen(const FeatureMatrix& matrix, const TestCase& t, const Dataset& d,
                              const FeatureScope& scope);

}  // namespace rts
