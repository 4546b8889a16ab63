#include "rts/serialize.hpp"

#include <cmath>

#include "rts/error.hpp"

namespace rts {

double round9(double x) { return std::round(x * 1e9) / 1e9; }

namespace {

// Runs `f`, turning nlohmann access/type errors into PayloadInvalid.
template <typename F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::PayloadInvalid, std::string("invalid ") + what + ": " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

}  // namespace

json to_json(const FeatureCatalog& c) {
  json out = json::array();
  for (const auto& g : c.groups) {
    out.push_back(
        {{"name", g.name}, {"kind", to_string(g.kind)}, {"source", g.source}, {"columns", g.columns}});
  }
  return out;
}

json to_json(const FeatureScope& s) {
  return {{"target_release", s.target_release}, {"deselected_groups", s.deselected_groups}};
}

FeatureScope scope_from_json(const json& j) {
  return guarded("feature scope", [&] {
    FeatureScope s;
    s.target_release = j.at("target_release").get<std::string>();
    if (auto it = j.find("deselected_groups"); it != j.end() && !it->is_null()) {
      for (const auto& g : *it) s.deselected_groups.insert(g.get<std::string>());
    }
    return s;
  });
}

json to_json(const LabelEntry& e) {
  return {{"test_id", e.test_id}, {"label", to_string(e.label)}, {"role", to_string(e.role)}};
}

json to_json(const LabelSet& l) {
  json entries = json::array();
  for (const auto& e : l.entries) entries.push_back(to_json(e));
  return {{"entries", std::move(entries)}};
}

LabelSet labels_from_json(const json& j) {
  return guarded("labels", [&] {
    const json& arr = j.is_array() ? j : j.at("entries");
    if (!arr.is_array()) fail(ErrorCode::PayloadInvalid, "labels: entries must be an array");
    LabelSet out;
    for (const auto& e : arr) {
      const auto label = parse_label(e.at("label").get<std::string>());
      const auto role = parse_role(e.at("role").get<std::string>());
      if (!label) fail(ErrorCode::PayloadInvalid, "labels: label must be 'in' or 'out'");
      if (!role) fail(ErrorCode::PayloadInvalid, "labels: role must be 'training' or 'verification'");
      out.entries.push_back({e.at("test_id").get<std::string>(), *label, *role});
    }
    return out;
  });
}

json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.learning_rate},
          {"max_epochs", c.max_epochs},
          {"l2_lambda", c.l2_lambda},
          {"tolerance", c.tolerance}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig base) {
  return guarded("train config", [&] {
    base.learning_rate = get_or(j, "learning_rate", base.learning_rate);
    base.max_epochs = get_or(j, "max_epochs", base.max_epochs);
    base.l2_lambda = get_or(j, "l2_lambda", base.l2_lambda);
    base.tolerance = get_or(j, "tolerance", base.tolerance);
    return base;
  });
}

json to_json(const RankModel& m) {
  return {{"column_names", m.column_names},
          {"weights", m.weights},
          {"bias", m.bias},
          {"training_meta",
           {{"epochs_run", m.training_meta.epochs_run},
            {"final_loss", m.training_meta.final_loss},
            {"positives", m.training_meta.positives},
            {"negatives", m.training_meta.negatives}}}};
}

RankModel model_from_json(const json& j) {
  return guarded("model", [&] {
    RankModel m;
    m.column_names = j.at("column_names").get<std::vector<std::string>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    const json& meta = j.at("training_meta");
    m.training_meta.epochs_run = meta.at("epochs_run").get<int>();
    m.training_meta.final_loss = meta.at("final_loss").get<double>();
    m.training_meta.positives = meta.at("positives").get<std::size_t>();
    m.training_meta.negatives = meta.at("negatives").get<std::size_t>();
    if (m.weights.size() != m.column_names.size()) {
      fail(ErrorCode::PayloadInvalid, "model: weights and column_names differ in length");
    }
    return m;
  });
}

json suite_to_api_json(const RankedSuite& s) {
  json out = json::array();
  for (const auto& e : s.entries) {
    out.push_back({{"rank", e.rank}, {"test_id", e.test_id}, {"score", round9(e.score)}});
  }
  return out;
}

json to_json(const RankedSuite& s) {
  json out = json::array();
  for (const auto& e : s.entries) {
    out.push_back({{"rank", e.rank}, {"test_id", e.test_id}, {"score", e.score}});
  }
  return out;
}

RankedSuite suite_from_json(const json& j) {
  return guarded("ranked suite", [&] {
    RankedSuite s;
    for (const auto& e : j) {
      s.entries.push_back(
          {e.at("rank").get<std::size_t>(), e.at("test_id").get<std::string>(), e.at("score").get<double>()});
    }
    return s;
  });
}

json to_json(const VerificationDraw& d) {
  return {{"test_ids", d.test_ids}, {"seed", d.seed}, {"requested_k", d.requested_k}};
}

VerificationDraw draw_from_json(const json& j) {
  return guarded("verification draw", [&] {
    VerificationDraw d;
    d.test_ids = j.at("test_ids").get<std::vector<std::string>>();
    d.seed = j.at("seed").get<std::uint64_t>();
    d.requested_k = j.at("requested_k").get<std::size_t>();
    return d;
  });
}

json to_json(const AdequacyReport& r) {
  json interval = nullptr;
  if (r.interval_d) {
    interval = {{"low_rank", r.interval_d->low_rank}, {"high_rank", r.interval_d->high_rank}};
  }
  return {{"pair_overlap", r.pair_overlap},
          {"pair_auc", r.pair_auc},
          {"overlapping_pairs", r.overlapping_pairs},
          {"total_pairs", r.total_pairs},
          {"separated", r.separated},
          {"interval_d", std::move(interval)},
          {"verdict", to_string(r.verdict)},
          {"in_labels", r.in_labels},
          {"out_labels", r.out_labels},
          {"small_sample", r.small_sample}};
}

AdequacyReport adequacy_from_json(const json& j) {
  return guarded("adequacy report", [&] {
    AdequacyReport r;
    r.pair_overlap = j.at("pair_overlap").get<double>();
    r.pair_auc = j.at("pair_auc").get<double>();
    r.overlapping_pairs = j.at("overlapping_pairs").get<std::uint64_t>();
    r.total_pairs = j.at("total_pairs").get<std::uint64_t>();
    r.separated = j.at("separated").get<bool>();
    if (const json& iv = j.at("interval_d"); !iv.is_null()) {
      r.interval_d = RankInterval{iv.at("low_rank").get<std::size_t>(),
                                  iv.at("high_rank").get<std::size_t>()};
    }
    auto verdict = parse_adequacy(j.at("verdict").get<std::string>());
    if (!verdict) fail(ErrorCode::PayloadInvalid, "adequacy report: unknown verdict");
    r.verdict = *verdict;
    r.in_labels = j.at("in_labels").get<std::size_t>();
    r.out_labels = j.at("out_labels").get<std::size_t>();
    r.small_sample = j.at("small_sample").get<bool>();
    return r;
  });
}

json to_json(const SelectionResult& s) {
  return {{"cutoff_rank", s.cutoff_rank},
          {"t_e_test_id", s.t_e_test_id},
          {"selected_ids", s.selected_ids},
          {"excluded_ids", s.excluded_ids},
          {"override_used", s.override_used}};
}

SelectionResult selection_from_json(const json& j) {
  return guarded("selection", [&] {
    SelectionResult s;
    s.cutoff_rank = j.at("cutoff_rank").get<std::size_t>();
    s.t_e_test_id = j.at("t_e_test_id").get<std::string>();
    s.selected_ids = j.at("selected_ids").get<std::vector<std::string>>();
    s.excluded_ids = j.at("excluded_ids").get<std::vector<std::string>>();
    s.override_used = j.at("override_used").get<bool>();
    return s;
  });
}

json to_json(const LearningCurve& c) {
  json points = json::array();
  for (const auto& p : c.points) {
    points.push_back({{"fraction", p.fraction},
                      {"positives", p.positives},
                      {"negatives", p.negatives},
                      {"pair_auc", p.pair_auc}});
  }
  return {{"points", std::move(points)}, {"saturated", c.saturated}};
}

}  // namespace rts
