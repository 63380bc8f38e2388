#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "histostack/classifiers/model.hpp"
#include "histostack/manifest.hpp"

namespace histostack {

// Per-split feature maps from one extractor, bound to the dataset manifest
// they were computed from. On disk: a directory holding train.npy, val.npy,
// test.npy (float32, rows in bundle order) and source.json
// {name, feature_width, manifest_hash}.
struct FeatureSource {
  std::string name;
  std::size_t feature_width = 0;
  std::string manifest_hash;
  std::array<FeatureMatrix, 3> splits;

  const FeatureMatrix& split(Split s) const { return splits[static_cast<std::size_t>(s)]; }
  FeatureMatrix& split(Split s) { return splits[static_cast<std::size_t>(s)]; }
};

// Throws ShapeError when a split's width differs from feature_width.
void validate_feature_source(const FeatureSource& source);
FeatureSource load_feature_source(const std::filesystem::path& dir);
void save_feature_source(const FeatureSource& source, const std::filesystem::path& dir);

// Reorders one split's rows (out row r = in row perm[r]). The manifest hash
// is re-derived from the permutation, so only sources permuted identically
// remain mutually consistent.
FeatureSource permute_rows(const FeatureSource& source, Split split, std::span<const std::size_t> perm);

// Horizontal concatenation in list order. Row counts must agree
// (AlignmentError) and all sources must carry the same manifest hash
// (ProvenanceError).
FeatureMatrix concat_features(std::span<const FeatureSource> sources, Split split);

// The numbered CNN triples of the ensembles; index 1..4.
std::vector<std::string> ensemble_triple(int number);

struct EnsembleSpec {
  std::vector<std::string> sources;  // 2 or 3 names, concatenation order
  HeadKind head = HeadKind::kLR;
  std::string shorthand;             // e.g. "3c"; empty for custom specs
};

// "<digit><letter>": digit picks the triple, a=lr b=svc c=rf d=lgbm.
EnsembleSpec parse_ensemble_spec(std::string_view shorthand);
EnsembleSpec custom_ensemble(std::vector<std::string> sources, HeadKind head);
std::string ensemble_label(const EnsembleSpec& spec);

struct EnsembleOptions {
  bool standardize = false;
  std::size_t num_classes = 0;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct EnsembleModel {
  EnsembleSpec spec;
  std::vector<std::size_t> source_widths;
  std::string manifest_hash;
  bool standardize = false;
  std::vector<double> column_mean;
  std::vector<double> column_scale;
  nlohmann::json head_params;
  ClassifierModel head;
};

// Picks sources by name in the spec's order; a missing name is a
// ProvenanceError.
std::vector<FeatureSource> select_sources(std::span<const FeatureSource> available, const EnsembleSpec& spec);

// Binds the recipe (names, widths, manifest hash) and, when requested, the
// training-split standardization statistics; the head is left unfitted.
EnsembleModel prepare_ensemble(const EnsembleSpec& spec, std::span<const FeatureSource> sources,
                               const EnsembleOptions& options = {});

EnsembleModel fit_ensemble(const EnsembleSpec& spec, std::span<const FeatureSource> sources,
                           std::span<const std::int64_t> y_train, const nlohmann::json& head_params,
                           const EnsembleOptions& options = {});

enum class ProvenanceCheck {
  kStrict,        // sources must carry the model's manifest hash
  kSourcesOnly,   // names, order and widths must match; hashes only among themselves
};

// The head's input for a split: the concatenation, standardized when the
// model was fitted with standardization.
FeatureMatrix ensemble_inputs(const EnsembleModel& model, std::span<const FeatureSource> sources, Split split,
                              ProvenanceCheck check = ProvenanceCheck::kStrict);

Labels predict_ensemble(const EnsembleModel& model, std::span<const FeatureSource> sources, Split split,
                        ProvenanceCheck check = ProvenanceCheck::kStrict);

nlohmann::json ensemble_to_json(const EnsembleModel& model);
EnsembleModel ensemble_from_json(const nlohmann::json& doc);

}  // namespace histostack
