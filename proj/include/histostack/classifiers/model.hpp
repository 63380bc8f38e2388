#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "histostack/classifiers/forest.hpp"
#include "histostack/classifiers/gbdt.hpp"
#include "histostack/classifiers/logistic.hpp"
#include "histostack/classifiers/svc.hpp"

namespace histostack {

enum class HeadKind { kLR, kSVC, kRF, kGBDT };

// "lr", "svc", "rf", "lgbm".
std::string_view head_name(HeadKind kind);
HeadKind parse_head(std::string_view name);

using ClassifierModel = std::variant<LRModel, SVCModel, ForestModel, GBDTModel>;

HeadKind head_kind(const ClassifierModel& model);

inline constexpr int kModelSchemaVersion = 1;

// Hyper-parameters are a flat JSON object; keys not understood by the head
// are rejected with BadConfig.
//   lr:   c, tol, max_iter
//   svc:  C, kernel, gamma (number or "auto" = 1/p), degree, coef0, tol, max_iter
//   rf:   n_estimators, max_features, max_depth (null = unlimited), bootstrap
//   lgbm: n_stages, learning_rate, num_leaves, min_samples_leaf, lambda
struct FitContext {
  std::size_t num_classes = 0;
  std::uint64_t seed = 0;
  int threads = 1;
};

ClassifierModel fit_head(HeadKind kind, const FeatureMatrix& x, std::span<const std::int64_t> y,
                         const nlohmann::json& params, const FitContext& ctx = {});

Labels predict_labels(const ClassifierModel& model, const FeatureMatrix& x);

std::size_t model_num_features(const ClassifierModel& model);

nlohmann::json model_to_json(const ClassifierModel& model);
ClassifierModel model_from_json(const nlohmann::json& doc);

}  // namespace histostack
