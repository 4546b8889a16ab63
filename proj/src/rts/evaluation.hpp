#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rts/datamodel.hpp"
#include "rts/features.hpp"
#include "rts/ranker.hpp"

namespace rts {

// Faults are the defects revealed at one release. first_failures[i] is the
// 1-based position of the first test in the ordering revealing fault_ids[i].
struct FaultMatrix {
  std::size_t n = 0;
  std::vector<std::string> fault_ids;
  std::vector<std::size_t> first_failures;
  std::vector<std::string> excluded_faults;

  std::size_t m() const { return first_failures.size(); }
};

FaultMatrix build_fault_matrix(std::span<const std::string> ordering, const Dataset& d,
                               std::string_view release);

// APFD = 1 - sum(TF_i) / (n m) + 1 / (2 n). Throws NoFaults when m = 0.
double apfd(const FaultMatrix& fm);

// Tests of `d` that carry a history entry for `release`, in dataset order.
std::vector<std::string> tests_with_history(const Dataset& d, std::string_view release);

// Mean APFD over `trials` uniform permutations of tests_with_history(d,
// release). Each trial applies one more Fisher-Yates pass (SplitMix64(seed))
// to the previous permutation.
double random_baseline(const Dataset& d, std::string_view release, std::size_t trials,
                       std::uint64_t seed);

enum class LabelingRule { HistoryVerdict };

struct BacktestOptions {
  LabelingRule labeling_rule = LabelingRule::HistoryVerdict;
  std::size_t window = 2;        // prior releases feeding the training labels
  std::size_t baseline_trials = 0;  // 0 disables the random-baseline column
  std::uint64_t seed = 0;
};

// Training labels for `release` under the history-verdict rule: a test that
// failed in any window release is in; one that only passed is out; tests
// never executed there stay unlabeled.
LabelSet history_labels(const Dataset& d, std::string_view release, std::size_t window);

struct ReleaseResult {
  std::string release;
  double apfd = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t excluded_fault_count = 0;
  std::size_t training_in = 0;
  std::size_t training_out = 0;
  std::optional<double> random_apfd;
};

struct SkippedRelease {
  std::string release;
  std::string reason;  // error code name
  std::string message;
};

struct BacktestReport {
  std::vector<ReleaseResult> per_release;
  std::vector<SkippedRelease> skipped;
  std::optional<double> mean_apfd;

  bool empty() const { return per_release.empty(); }
};

BacktestReport backtest(const Dataset& d, const FeatureScope& scope_template,
                        const TrainConfig& cfg, std::span<const std::string> releases,
                        const BacktestOptions& options = {});

nlohmann::json to_json(const BacktestReport& r);
std::string render_table(const BacktestReport& r);

}  // namespace rts
