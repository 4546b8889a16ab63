#include "rts/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "rts/error.hpp"
#include "rts/verification.hpp"

namespace rts {

std::string_view to_string(Label l) { return l == Label::In ? "in" : "out"; }
std::string_view to_string(Role r) {
  return r == Role::Training ? "training" : "verification";
}

std::optional<Label> parse_label(std::string_view s) {
  if (s == "in") return Label::In;
  if (s == "out") return Label::Out;
  return std::nullopt;
}

std::optional<Role> parse_role(std::string_view s) {
  if (s == "training") return Role::Training;
  if (s == "verification") return Role::Verification;
  return std::nullopt;
}

const LabelEntry* LabelSet::find(std::string_view test_id) const {
  for (const auto& e : entries) {
    if (e.test_id == test_id) return &e;
  }
  return nullptr;
}

LabelSet LabelSet::with_role(Role role) const {
  LabelSet out;
  for (const auto& e : entries) {
    if (e.role == role) out.entries.push_back(e);
  }
  return out;
}

std::size_t LabelSet::count(Role role, Label label) const {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [&](const auto& e) {
    return e.role == role && e.label == label;
  }));
}

std::set<std::string> LabelSet::ids(Role role) const {
  std::set<std::string> out;
  for (const auto& e : entries) {
    if (e.role == role) out.insert(e.test_id);
  }
  return out;
}

void check_labels(const LabelSet& labels, const Dataset& d) {
  std::set<std::string> seen;
  for (const auto& e : labels.entries) {
    if (!seen.insert(e.test_id).second) {
      fail(ErrorCode::PayloadInvalid, "test '" + e.test_id + "' is labeled more than once");
    }
    if (!d.find_test(e.test_id)) {
      fail(ErrorCode::UnknownTestId, "labeled test '" + e.test_id + "' is not in the dataset");
    }
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    fail(ErrorCode::InvalidArgument, "learning_rate must be positive");
  }
  if (max_epochs <= 0) fail(ErrorCode::InvalidArgument, "max_epochs must be positive");
  if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) {
    fail(ErrorCode::InvalidArgument, "l2_lambda must be non-negative");
  }
  if (!(tolerance > 0.0)) fail(ErrorCode::InvalidArgument, "tolerance must be positive");
}

const RankedEntry* RankedSuite::find(std::string_view test_id) const {
  for (const auto& e : entries) {
    if (e.test_id == test_id) return &e;
  }
  return nullptr;
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_rows(std::span<const SparseVector> rows, std::span<const int> labels,
                std::size_t dimension) {
  if (rows.size() != labels.size()) {
    fail(ErrorCode::DimensionMismatch, std::to_string(rows.size()) + " rows but " +
                                           std::to_string(labels.size()) + " labels");
  }
  if (rows.empty()) fail(ErrorCode::DimensionMismatch, "no rows to train on");
  for (const auto& r : rows) {
    if (r.nonzeros() > 0 && r.indices().back() >= dimension) {
      fail(ErrorCode::DimensionMismatch, "row index exceeds weight dimension " +
                                             std::to_string(dimension));
    }
  }
}

}  // namespace

LossGradient loss_and_gradient(std::span<const double> weights, double bias,
                               std::span<const SparseVector> rows, std::span<const int> labels,
                               double l2_lambda) {
  check_rows(rows, labels, weights.size());
  LossGradient out;
  out.gradient.assign(weights.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double z = rows[i].dot(weights) + bias;
    const double y = labels[i] != 0 ? 1.0 : 0.0;
    loss += softplus(z) - y * z;
    const double residual = logistic(z) - y;
    out.bias_gradient += residual;
    const auto idx = rows[i].indices();
    const auto val = rows[i].values();
    for (std::size_t k = 0; k < idx.size(); ++k) out.gradient[idx[k]] += residual * val[k];
  }
  double norm2 = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    out.gradient[j] = out.gradient[j] * inv_n + l2_lambda * weights[j];
    norm2 += weights[j] * weights[j];
  }
  out.bias_gradient *= inv_n;
  out.loss = loss * inv_n + 0.5 * l2_lambda * norm2;
  return out;
}

RankModel fit(std::span<const SparseVector> rows, std::span<const int> labels,
              std::size_t dimension, const TrainConfig& cfg, TrainTrace* trace) {
  cfg.validate();
  check_rows(rows, labels, dimension);

  RankModel model;
  model.weights.assign(dimension, 0.0);
  for (int y : labels) (y != 0 ? model.training_meta.positives : model.training_meta.negatives)++;

  double lr = cfg.learning_rate;
  LossGradient current = loss_and_gradient(model.weights, model.bias, rows, labels, cfg.l2_lambda);
  if (trace) {
    trace->losses.push_back(current.loss);
    trace->learning_rates.push_back(lr);
  }

  std::vector<double> candidate(dimension);
  int epoch = 0;
  while (epoch < cfg.max_epochs) {
    ++epoch;
    for (std::size_t j = 0; j < dimension; ++j) {
      candidate[j] = model.weights[j] - lr * current.gradient[j];
    }
    const double candidate_bias = model.bias - lr * current.bias_gradient;
    LossGradient next = loss_and_gradient(candidate, candidate_bias, rows, labels, cfg.l2_lambda);
    if (next.loss > current.loss) {
      lr *= 0.5;
      continue;
    }
    const double decrease = current.loss - next.loss;
    model.weights.swap(candidate);
    model.bias = candidate_bias;
    current = std::move(next);
    if (trace) {
      trace->losses.push_back(current.loss);
      trace->learning_rates.push_back(lr);
    }
    if (decrease < cfg.tolerance) break;
  }
  model.training_meta.epochs_run = epoch;
  model.training_meta.final_loss = current.loss;
  return model;
}

RankModel train(const FeatureMatrix& matrix, const LabelSet& labels, const TrainConfig& cfg,
                TrainTrace* trace) {
  std::vector<SparseVector> rows;
  std::vector<int> ys;
  for (const auto& e : labels.entries) {
    if (e.role != Role::Training) continue;
    auto idx = matrix.row_index(e.test_id);
    if (!idx) {
      fail(ErrorCode::UnknownTestId, "training label for unknown test '" + e.test_id + "'");
    }
    rows.push_back(matrix.rows[*idx]);
    ys.push_back(e.label == Label::In ? 1 : 0);
  }
  const auto positives = std::count(ys.begin(), ys.end(), 1);
  if (positives == 0 || positives == static_cast<long>(ys.size())) {
    fail(ErrorCode::DegenerateLabels, "training needs at least one in and one out label (got " +
                                          std::to_string(positives) + " in, " +
                                          std::to_string(ys.size() - positives) + " out)");
  }
  RankModel model = fit(rows, ys, matrix.dimension(), cfg, trace);
  model.column_names = matrix.column_names;
  return model;
}

double sigmoid_score(double z) { return std::clamp(logistic(z), kScoreFloor, 1.0 - kScoreFloor); }

double score(const RankModel& model, const SparseVector& v) {
  if (v.nonzeros() > 0 && v.indices().back() >= model.weights.size()) {
    fail(ErrorCode::DimensionMismatch, "feature vector wider than the model");
  }
  return sigmoid_score(v.dot(model.weights) + model.bias);
}

double score(const RankModel& model, std::span<const double> dense) {
  if (dense.size() != model.weights.size()) {
    fail(ErrorCode::DimensionMismatch, "vector has " + std::to_string(dense.size()) +
                                           " entries, model has " +
                                           std::to_string(model.weights.size()));
  }
  double z = model.bias;
  for (std::size_t j = 0; j < dense.size(); ++j) z += model.weights[j] * dense[j];
  return sigmoid_score(z);
}

RankedSuite make_suite(std::vector<std::pair<std::string, double>> scored) {
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  RankedSuite suite;
  suite.entries.reserve(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    suite.entries.push_back({i + 1, std::move(scored[i].first), scored[i].second});
  }
  return suite;
}

RankedSuite rank(const RankModel& model, const FeatureMatrix& matrix, const Dataset& d,
                 const FeatureScope& scope, const std::set<std::string>& training_ids) {
  if (model.column_names != matrix.column_names) {
    fail(ErrorCode::ScopeMismatch, "model columns differ from the feature matrix columns");
  }
  std::vector<std::pair<std::string, double>> scored;
  for (const auto& t : d.tests) {
    if (training_ids.contains(t.id)) continue;
    scored.emplace_back(t.id, score(model, vectorize_unseen(matrix, t, d, scope)));
  }
  return make_suite(std::move(scored));
}

RankedSuite rank(const RankModel& model, const Dataset& d, const FeatureScope& scope,
                 const std::set<std::string>& training_ids) {
  return rank(model, extract_features(d, scope), d, scope, training_ids);
}

LearningCurve learning_curve(const FeatureMatrix& matrix, const LabelSet& labels,
                             const TrainConfig& cfg, std::vector<double> fractions) {
  std::vector<const LabelEntry*> ins, outs;
  std::vector<double> verify_in, verify_out;
  std::vector<const LabelEntry*> verification;
  for (const auto& e : labels.entries) {
    if (e.role == Role::Training) {
      (e.label == Label::In ? ins : outs).push_back(&e);
    } else {
      verification.push_back(&e);
    }
  }
  if (ins.size() < 4 || outs.size() < 4) {
    fail(ErrorCode::DegenerateLabels, "learning curves need at least 4 training labels per class");
  }
  std::size_t verify_classes[2] = {0, 0};
  for (const auto* e : verification) ++verify_classes[e->label == Label::In ? 0 : 1];
  if (verify_classes[0] == 0 || verify_classes[1] == 0) {
    fail(ErrorCode::DegenerateLabels, "learning curves need verification labels of both classes");
  }
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) fail(ErrorCode::InvalidArgument, "fractions must lie in (0, 1]");
  }

  LearningCurve curve;
  for (double f : fractions) {
    const auto take = [f](std::size_t k) {
      return std::min(k, static_cast<std::size_t>(std::ceil(f * static_cast<double>(k) - 1e-12)));
    };
    LabelSet subset;
    const std::size_t n_in = take(ins.size()), n_out = take(outs.size());
    for (std::size_t i = 0; i < n_in; ++i) subset.entries.push_back(*ins[i]);
    for (std::size_t i = 0; i < n_out; ++i) subset.entries.push_back(*outs[i]);
    const RankModel model = train(matrix, subset, cfg);

    std::vector<double> in_scores, out_scores;
    for (const auto* e : verification) {
      auto idx = matrix.row_index(e->test_id);
      if (!idx) fail(ErrorCode::UnknownTestId, "verification label for unknown test '" + e->test_id + "'");
      (e->label == Label::In ? in_scores : out_scores).push_back(score(model, matrix.rows[*idx]));
    }
    const PairCount pairs = count_overlapping_pairs(in_scores, out_scores);
    curve.points.push_back({f, n_in, n_out, 1.0 - pairs.fraction()});
  }
  if (curve.points.size() >= 2) {
    const auto& last = curve.points.back();
    const auto& prev = curve.points[curve.points.size() - 2];
    curve.saturated = last.pair_auc - prev.pair_auc < kSaturationGain;
  }
  return curve;
}

}  // namespace rts
