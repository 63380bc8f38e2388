#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "histostack/classifiers/tree.hpp"
#include "histostack/feature_matrix.hpp"

namespace histostack {

struct RFParams {
  std::size_t n_estimators = 100;
  std::size_t max_features = 0;  // 0 selects floor(sqrt(p))
  std::optional<std::size_t> max_depth{};
  bool bootstrap = true;
  std::uint64_t seed = 0;
  int threads = 1;
};

// Gini classification forest. Tree t draws its bootstrap sample and its split
// feature subsets from Rng(mix_seed(seed, t)).
struct ForestModel {
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::size_t max_features = 0;
  std::optional<std::size_t> max_depth{};
  bool bootstrap = true;
  std::uint64_t seed = 0;
  std::vector<Tree> trees;
};

std::size_t resolve_max_features(std::size_t requested, std::size_t p);

// n draws with replacement from [0, n).
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t tree_seed);

ForestModel rf_fit(const FeatureMatrix& x, std::span<const std::int64_t> y, const RFParams& params,
                   std::size_t num_classes = 0);

// Row t holds tree t's predicted label for every sample.
std::vector<Labels> rf_tree_predictions(const ForestModel& model, const FeatureMatrix& x);

// Mode of the tree votes; ties go to the lowest class index.
Labels rf_predict(const ForestModel& model, const FeatureMatrix& x);

// Vote fractions per class.
ScoreMatrix rf_predict_proba(const ForestModel& model, const FeatureMatrix& x);

// Out-of-bag accuracy on the training data; samples in every bootstrap are
// skipped. Returns nullopt when no sample is out of bag.
std::optional<double> rf_oob_accuracy(const ForestModel& model, const FeatureMatrix& x,
                                      std::span<const std::int64_t> y);

}  // namespace histostack
