#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "histostack/classifiers/tree.hpp"
#include "histostack/feature_matrix.hpp"

namespace histostack {

struct GBDTParams {
  std::size_t n_stages = 100;
  double learning_rate = 0.1;
  std::size_t num_leaves = 31;
  std::size_t min_samples_leaf = 1;
  double lambda = 1.0;
  int threads = 1;
};

struct BoostStage {
  Tree tree;
  double shrinkage = 0;
};

// One boosted sequence per class (one-vs-rest, also for two classes):
//   F_m(x) = F_{m-1}(x) + shrinkage_m * tree_m(x).
struct GBDTModel {
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::size_t num_leaves = 0;
  std::size_t min_samples_leaf = 1;
  double learning_rate = 0.1;
  double lambda = 1.0;
  std::vector<double> initial_scores;
  std::vector<std::vector<BoostStage>> stages;  // [class][stage]
};

inline constexpr double kInitialScoreClamp = 10.0;

GBDTModel gbdt_fit(const FeatureMatrix& x, std::span<const std::int64_t> y, const GBDTParams& params,
                   std::size_t num_classes = 0);

// Raw scores after the first `stages` stages (all when nullopt).
ScoreMatrix gbdt_decision(const GBDTModel& model, const FeatureMatrix& x,
                          std::optional<std::size_t> stages = std::nullopt);

// Per-class sigmoids, normalized across classes.
ScoreMatrix gbdt_predict_proba(const GBDTModel& model, const FeatureMatrix& x,
                               std::optional<std::size_t> stages = std::nullopt);
Labels gbdt_predict(const GBDTModel& model, const FeatureMatrix& x);

}  // namespace histostack
