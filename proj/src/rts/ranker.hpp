#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rts/datamodel.hpp"
#include "rts/features.hpp"

namespace rts {

enum class Label { In, Out };
enum class Role { Training, Verification };

std::string_view to_string(Label l);
std::string_view to_string(Role r);
std::optional<Label> parse_label(std::string_view s);
std::optional<Role> parse_role(std::string_view s);

struct LabelEntry {
  std::string test_id;
  Label label;
  Role role;

  bool operator==(const LabelEntry&) const = default;
};

// Human in/out decisions. Training entries form T+ (in) and T- (out);
// verification entries are the labeled part of the verification sample.
struct LabelSet {
  std::vector<LabelEntry> entries;

  const LabelEntry* find(std::string_view test_id) const;
  LabelSet with_role(Role role) const;
  std::size_t count(Role role, Label label) const;
  std::set<std::string> ids(Role role) const;

  bool operator==(const LabelSet&) const = default;
};

// Throws PayloadInvalid on duplicate ids and UnknownTestId on ids missing
// from `d`.
void check_labels(const LabelSet& labels, const Dataset& d);

struct TrainConfig {
  double learning_rate = 0.1;
  int max_epochs = 500;
  double l2_lambda = 1e-3;
  double tolerance = 1e-7;  // absolute loss decrease per epoch

  // Throws InvalidArgument when a field is out of range.
  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct TrainingMeta {
  int epochs_run = 0;
  double final_loss = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;

  bool operator==(const TrainingMeta&) const = default;
};

struct RankModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<std::string> column_names;
  TrainingMeta training_meta;

  bool operator==(const RankModel&) const = default;
};

struct RankedEntry {
  std::size_t rank = 0;  // 1-based
  std::string test_id;
  double score = 0.0;

  bool operator==(const RankedEntry&) const = default;
};

// Monotone ranking: scores non-increasing with rank, ties by ascending id.
struct RankedSuite {
  std::vector<RankedEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  const RankedEntry* find(std::string_view test_id) const;

  bool operator==(const RankedSuite&) const = default;
};

struct LossGradient {
  double loss = 0.0;
  std::vector<double> gradient;
  double bias_gradient = 0.0;
};

// Mean logistic cross-entropy plus (l2/2)*|w|^2 and its gradient. Labels are
// 1 for in and 0 for out.
LossGradient loss_and_gradient(std::span<const double> weights, double bias,
                               std::span<const SparseVector> rows, std::span<const int> labels,
                               double l2_lambda);

// Optional per-epoch record of accepted losses, starting with the loss at the
// zero initialization.
struct TrainTrace {
  std::vector<double> losses;
  std::vector<double> learning_rates;
};

// Full-batch gradient descent from zero weights. A step that would increase
// the loss is rejected and the learning rate halved, so accepted losses never
// increase. No randomness is involved.
RankModel fit(std::span<const SparseVector> rows, std::span<const int> labels,
              std::size_t dimension, const TrainConfig& cfg, TrainTrace* trace = nullptr);

// Trains on the training-role entries of `labels`; verification entries are
// ignored.
RankModel train(const FeatureMatrix& matrix, const LabelSet& labels, const TrainConfig& cfg,
                TrainTrace* trace = nullptr);

inline constexpr double kScoreFloor = 1e-9;

// Logistic function without overflow, clamped to [1e-9, 1 - 1e-9].
double sigmoid_score(double z);
double score(const RankModel& model, const SparseVector& v);
double score(const RankModel& model, std::span<const double> dense);

// Ranks every test of `d` not in `training_ids`.
RankedSuite rank(const RankModel& model, const FeatureMatrix& matrix, const Dataset& d,
                 const FeatureScope& scope, const std::set<std::string>& training_ids);
RankedSuite rank(const RankModel& model, const Dataset& d, const FeatureScope& scope,
                 const std::set<std::string>& training_ids);

// Sorts (test_id, score) pairs into a RankedSuite.
RankedSuite make_suite(std::vector<std::pair<std::string, double>> scored);

struct CurvePoint {
  double fraction = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  double pair_auc = 0.0;

  bool operator==(const CurvePoint&) const = default;
};

struct LearningCurve {
  std::vector<CurvePoint> points;
  bool saturated = false;
};

// Gain below which the last increment counts as saturated.
inline constexpr double kSaturationGain = 0.01;

LearningCurve learning_curve(const FeatureMatrix& matrix, const LabelSet& labels,
                             const TrainConfig& cfg,
                             std::vector<double> fractions = {0.25, 0.5, 0.75, 1.0});

}  // namespace rts
