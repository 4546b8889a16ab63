#pragma once

#include <json.hpp>

#include "rts/evaluation.hpp"
#include "rts/features.hpp"
#include "rts/ranker.hpp"
#include "rts/verification.hpp"

// JSON forms of the core value types. The *_from_json readers throw
// Error{PayloadInvalid} on missing or mistyped fields.
namespace rts {

using nlohmann::json;

// Scores leave the API rounded to nine decimal digits.
double round9(double x);

json to_json(const FeatureCatalog& c);
json to_json(const FeatureScope& s);
FeatureScope scope_from_json(const json& j);

json to_json(const LabelEntry& e);
json to_json(const LabelSet& l);
LabelSet labels_from_json(const json& j);  // accepts {entries:[...]} or a bare array

json to_json(const TrainConfig& c);
// Fields absent from `j` keep the values of `base`.
TrainConfig train_config_from_json(const json& j, TrainConfig base = {});

json to_json(const RankModel& m);
RankModel model_from_json(const json& j);

// API form: array of {rank, test_id, score} with scores rounded to 9 digits.
json suite_to_api_json(const RankedSuite& s);
// Lossless form used for persistence.
json to_json(const RankedSuite& s);
RankedSuite suite_from_json(const json& j);

json to_json(const VerificationDraw& d);
VerificationDraw draw_from_json(const json& j);

json to_json(const AdequacyReport& r);
AdequacyReport adequacy_from_json(const json& j);

json to_json(const SelectionResult& s);
SelectionResult selection_from_json(const json& j);

json to_json(const LearningCurve& c);

}  // namespace rts
