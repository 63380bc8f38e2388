#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "histostack/classifiers/model.hpp"
#include "histostack/metrics.hpp"
#include "histostack/stacker.hpp"

namespace histostack {

// ---- grid search ----------------------------------------------------------

struct ParamGrid {
  HeadKind head = HeadKind::kLR;
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> axes;

  // Cartesian product with the first axis outermost.
  std::vector<nlohmann::json> points() const;
  std::size_t size() const;
  void validate() const;
};

ParamGrid default_grid(HeadKind head);

// {"head": "svc", "axes": [{"name": "C", "values": [...]}, ...]}. An object
// for "axes" is accepted too; keys then follow the document's own order when
// read through grid_from_text.
nlohmann::json grid_to_json(const ParamGrid& grid);
ParamGrid grid_from_json(const nlohmann::json& doc);
ParamGrid grid_from_text(const std::string& text);

struct GridCandidate {
  nlohmann::json params;
  std::uint64_t seed = 0;
  std::optional<double> val_accuracy;
  std::string error;
};

struct GridOptions {
  std::uint64_t seed = 0;
  std::size_t num_classes = 0;
  int threads = 1;
};

struct GridResult {
  std::size_t best_index = 0;
  nlohmann::json best_params;
  double best_val_accuracy = 0;
  std::vector<GridCandidate> candidates;
  ClassifierModel best_model;
};

// Point i is fitted with seed mix_seed(options.seed, i). The best validation
// accuracy wins; ties go to the earliest point. GridExhausted when every fit
// fails.
GridResult grid_search(const ParamGrid& grid, const FeatureMatrix& x_train, std::span<const std::int64_t> y_train,
                       const FeatureMatrix& x_val, std::span<const std::int64_t> y_val, const GridOptions& options = {});

nlohmann::json grid_result_to_json(const GridResult& result);

double accuracy(std::span<const std::int64_t> truth, std::span<const std::int64_t> predicted);

// ---- run records ----------------------------------------------------------

inline constexpr int kRunRecordSchemaVersion = 1;

struct RunRecord {
  int schema_version = kRunRecordSchemaVersion;
  std::string run_id;
  std::string dataset_name;
  std::string model_name;
  nlohmann::json ensemble;  // {sources, head, shorthand} or null for standalone models
  bool augmented = false;
  bool static_augmentation = false;
  nlohmann::json selected_params = nlohmann::json::object();
  double best_val_accuracy = 0;
  nlohmann::json grid;  // grid definition plus every candidate score
  std::uint64_t seed = 0;
  std::string manifest_hash;
  std::string manifest_path;
  nlohmann::json feature_sources = nlohmann::json::array();
  bool standardize = false;
  std::vector<std::string> class_names;
  nlohmann::json metrics;
  ConfusionMatrix confusion;
  nlohmann::json cnn_training;  // settings of the upstream extractor training, when known
  nlohmann::json timestamps = nlohmann::json::object();
  nlohmann::json extra = nlohmann::json::object();  // unknown fields, preserved

  double test_accuracy() const;
};

nlohmann::json run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& doc);
RunRecord read_run_record(const std::filesystem::path& path);
void write_run_record(const RunRecord& record, const std::filesystem::path& path);

// ---- evaluation -----------------------------------------------------------

struct EvaluateConfig {
  std::string dataset_name;
  std::filesystem::path manifest_path;
  std::vector<std::filesystem::path> source_dirs;
  EnsembleSpec spec;
  std::optional<ParamGrid> grid;  // default_grid(spec.head) when unset
  bool standardize = false;
  bool augmented = false;
  bool static_augmentation = false;
  std::optional<std::string> positive_class;
  std::uint64_t seed = 0;
  std::filesystem::path out_root;
  std::string run_id;  // derived from the configuration when empty
  nlohmann::json cnn_training;
  int threads = 1;  // execution detail; not part of the record
};

// Everything that determines the outcome of a run.
nlohmann::json evaluate_config_to_json(const EvaluateConfig& config);
std::string derive_run_id(const EvaluateConfig& config);

// Rebuilds the configuration a record was produced from; the run id is kept.
EvaluateConfig evaluate_config_from_record(const RunRecord& record);

// Loaded and provenance-checked inputs of a run: the bundle, the selected
// sources and the head inputs per split (standardized when configured).
struct PreparedRun {
  DatasetBundle bundle;
  std::vector<FeatureSource> sources;
  nlohmann::json source_info = nlohmann::json::array();
  ParamGrid grid;
  EnsembleModel model;
  std::array<FeatureMatrix, 3> x;
  std::array<Labels, 3> y;
  std::optional<std::size_t> positive_class;
};

PreparedRun prepare_run(const EvaluateConfig& config);

struct EvaluateResult {
  RunRecord record;
  std::filesystem::path run_dir;
  EnsembleModel model;
};

// Grid search on validation, best model refit on train only, scored on test.
// Writes <out_root>/<dataset>/<model>/<run-id>/{model.json,hyperparameters.json}
// only after every step has succeeded.
EvaluateResult evaluate_run(const EvaluateConfig& config);

std::filesystem::path run_directory(const std::filesystem::path& root, const std::string& dataset,
                                    const std::string& model, const std::string& run_id);

// ---- curation -------------------------------------------------------------

// Datasets mapped to the same group are averaged first; the weighted average
// is the mean over groups. Unmapped datasets form their own group.
struct CurationConfig {
  std::map<std::string, std::string> groups;
  std::vector<std::string> dataset_order;  // column order; sorted names when empty
};

CurationConfig curation_config_from_json(const nlohmann::json& doc);

double weighted_average(const std::map<std::string, double>& accuracy, const CurationConfig& config);

struct LeaderboardRow {
  std::string model;
  std::map<std::string, double> accuracy;  // dataset -> best test accuracy
  std::map<std::string, std::string> records;  // dataset -> record path
  double weighted_average = 0;
};

struct SkippedRecord {
  std::string path;
  std::string reason;
};

struct Leaderboard {
  std::vector<std::string> datasets;
  std::vector<LeaderboardRow> rows;  // descending weighted average, then model name
  std::vector<SkippedRecord> skipped;
  std::size_t records_read = 0;
};

// Paths may be run directories, trees of them, or record files.
Leaderboard curate(const std::vector<std::filesystem::path>& roots, const CurationConfig& config = {});

std::string leaderboard_markdown(const Leaderboard& board);
std::string leaderboard_csv(const Leaderboard& board);
nlohmann::json leaderboard_to_json(const Leaderboard& board);

// ---- challenge submission -------------------------------------------------

// Headerless "image_id,class_index" lines in input order.
std::string challenge_csv_text(std::span<const std::int64_t> predictions, const std::vector<std::string>& ids);
std::vector<std::pair<std::string, std::int64_t>> parse_challenge_csv(const std::string& text);

Labels emit_challenge_csv(const EnsembleModel& model, std::span<const FeatureSource> sources, Split split,
                          const std::vector<std::string>& ids, const std::filesystem::path& out);

}  // namespace histostack
