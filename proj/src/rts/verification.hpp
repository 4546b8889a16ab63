#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rts/ranker.hpp"

namespace rts {

struct VerificationDraw {
  std::vector<std::string> test_ids;  // in suite order
  std::uint64_t seed = 0;
  std::size_t requested_k = 0;

  bool operator==(const VerificationDraw&) const = default;
};

// Uniform sample without replacement of min(k, |suite|) test ids, driven by
// SplitMix64(seed) through a partial Fisher-Yates shuffle of suite positions.
VerificationDraw draw_verification(const RankedSuite& suite, std::size_t requested_k,
                                   std::uint64_t seed);

// Number of (in, out) pairs with score(out) >= score(in), and the number of
// pairs overall.
struct PairCount {
  std::uint64_t overlapping = 0;
  std::uint64_t total = 0;

  double fraction() const {
    return total == 0 ? 0.0 : static_cast<double>(overlapping) / static_cast<double>(total);
  }
};

PairCount count_overlapping_pairs(std::span<const double> in_scores,
                                  std::span<const double> out_scores);

enum class Adequacy { Adequate, Marginal, Inadequate };

std::string_view to_string(Adequacy a);
std::optional<Adequacy> parse_adequacy(std::string_view s);

struct AdequacyThresholds {
  double adequate = 0.0;
  double marginal = 0.1;

  void validate() const;
  bool operator==(const AdequacyThresholds&) const = default;
};

struct RankInterval {
  std::size_t low_rank = 0;   // rank of the lowest-ranked in-labeled test
  std::size_t high_rank = 0;  // rank of the highest-ranked out-labeled test

  bool operator==(const RankInterval&) const = default;
};

// Fewer labels than this in either class sets `small_sample`.
inline constexpr std::size_t kMinLabelsPerClass = 5;

struct AdequacyReport {
  std::uint64_t overlapping_pairs = 0;
  std::uint64_t total_pairs = 0;
  double pair_overlap = 0.0;
  double pair_auc = 1.0;
  bool separated = false;
  std::optional<RankInterval> interval_d;
  Adequacy verdict = Adequacy::Inadequate;
  std::size_t in_labels = 0;
  std::size_t out_labels = 0;
  bool small_sample = false;

  bool operator==(const AdequacyReport&) const = default;
};

// Compares the verification-role entries of `labels` against the suite.
AdequacyReport assess_adequacy(const RankedSuite& suite, const LabelSet& labels,
                               const AdequacyThresholds& thresholds = {});

struct SelectionResult {
  std::size_t cutoff_rank = 0;
  std::string t_e_test_id;
  std::vector<std::string> selected_ids;
  std::vector<std::string> excluded_ids;
  bool override_used = false;

  bool operator==(const SelectionResult&) const = default;
};

// A cutoff is accepted without override when the report is separated and
// low_rank <= cutoff_rank < high_rank.
SelectionResult choose_cutoff(const RankedSuite& suite, const AdequacyReport& report,
                              std::size_t cutoff_rank, bool allow_override);

}  // namespace rts
