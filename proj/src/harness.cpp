#include "histostack/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "histostack/hashing.hpp"
#include "histostack/parallel.hpp"
#include "histostack/rng.hpp"
#include "histostack/tensor_store.hpp"

namespace histostack {
namespace {

using nlohmann::json;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) fail(ErrorCode::kIoError, "cannot create " + path.parent_path().string());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIoError, "cannot write " + tmp.string());
    out << text;
    if (!out) fail(ErrorCode::kIoError, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot move " + tmp.string() + " to " + path.string());
}

std::string sanitize(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                    c == '-' || c == '_';
    if (!ok) c = '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_";
  return out;
}

json spec_to_json(const EnsembleSpec& spec) {
  return {{"sources", spec.sources}, {"head", head_name(spec.head)}, {"shorthand", spec.shorthand}};
}

EnsembleSpec spec_from_json(const json& doc) {
  EnsembleSpec spec;
  spec.sources = doc.at("sources").get<std::vector<std::string>>();
  spec.head = parse_head(doc.at("head").get<std::string>());
  spec.shorthand = doc.value("shorthand", std::string());
  return spec;
}

Labels labels_of(const DatasetBundle& bundle, Split split) {
  const auto v = bundle.labels(split).values<std::int64_t>();
  return Labels(v.begin(), v.end());
}

}  // namespace

// ---- grid -----------------------------------------------------------------

void ParamGrid::validate() const {
  if (axes.empty()) fail(ErrorCode::kBadConfig, "parameter grid has no axes");
  std::set<std::string> seen;
  for (const auto& [name, values] : axes) {
    if (name.empty()) fail(ErrorCode::kBadConfig, "grid axis without a name");
    if (!seen.insert(name).second) fail(ErrorCode::kBadConfig, "grid axis '" + name + "' repeated");
    if (values.empty()) fail(ErrorCode::kBadConfig, "grid axis '" + name + "' has no values");
  }
}

std::size_t ParamGrid::size() const {
  if (axes.empty()) return 0;
  std::size_t n = 1;
  for (const auto& axis : axes) n *= axis.second.size();
  return n;
}

std::vector<json> ParamGrid::points() const {
  validate();
  const std::size_t n = size();
  std::vector<json> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    json point = json::object();
    std::size_t rest = i;
    for (std::size_t a = axes.size(); a-- > 0;) {
      const auto& values = axes[a].second;
      point[axes[a].first] = values[rest % values.size()];
      rest /= values.size();
    }
    out.push_back(std::move(point));
  }
  return out;
}

ParamGrid default_grid(HeadKind head) {
  ParamGrid g;
  g.head = head;
  switch (head) {
    case HeadKind::kLR:
      g.axes = {{"c", {0.01, 0.1, 1.0, 10.0, 100.0}}};
      break;
    case HeadKind::kSVC:
      g.axes = {{"C", {0.1, 1.0, 10.0, 100.0}},
                {"kernel", {"linear", "rbf", "poly"}},
                {"gamma", {"auto", 0.01, 0.001}},
                {"degree", {2, 3}}};
      break;
    case HeadKind::kRF:
      g.axes = {{"n_estimators", {100, 300}}, {"max_depth", {nullptr, 16}}};
      break;
    case HeadKind::kGBDT:
      g.axes = {{"n_stages", {100, 200}}, {"learning_rate", {0.1, 0.05}}, {"num_leaves", {15, 31}}};
      break;
  }
  return g;
}

json grid_to_json(const ParamGrid& grid) {
  json axes = json::array();
  for (const auto& [name, values] : grid.axes) axes.push_back({{"name", name}, {"values", values}});
  return {{"head", head_name(grid.head)}, {"axes", axes}};
}

namespace {

template <typename Doc>
ParamGrid grid_from_doc(const Doc& doc) {
  ParamGrid g;
  try {
    g.head = parse_head(doc.at("head").template get<std::string>());
    const auto& axes = doc.at("axes");
    if (axes.is_array()) {
      for (const auto& a : axes) {
        std::vector<json> values;
        for (const auto& v : a.at("values")) values.push_back(json::parse(v.dump()));
        g.axes.emplace_back(a.at("name").template get<std::string>(), std::move(values));
      }
    } else if (axes.is_object()) {
      for (auto it = axes.begin(); it != axes.end(); ++it) {
        std::vector<json> values;
        if (!it.value().is_array()) fail(ErrorCode::kBadConfig, "grid axis '" + it.key() + "' must be a list");
        for (const auto& v : it.value()) values.push_back(json::parse(v.dump()));
        g.axes.emplace_back(it.key(), std::move(values));
      }
    } else {
      fail(ErrorCode::kBadConfig, "grid axes must be a list or an object");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kBadConfig, std::string("malformed grid: ") + e.what());
  }
  g.validate();
  return g;
}

}  // namespace

ParamGrid grid_from_json(const json& doc) { return grid_from_doc(doc); }

ParamGrid grid_from_text(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kBadConfig, std::string("grid is not valid JSON: ") + e.what());
  }
  return grid_from_doc(doc);
}

double accuracy(std::span<const std::int64_t> truth, std::span<const std::int64_t> predicted) {
  if (truth.size() != predicted.size()) fail(ErrorCode::kShapeError, "label vectors differ in length");
  if (truth.empty()) fail(ErrorCode::kBadInput, "accuracy of an empty split");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

GridResult grid_search(const ParamGrid& grid, const FeatureMatrix& x_train, std::span<const std::int64_t> y_train,
                       const FeatureMatrix& x_val, std::span<const std::int64_t> y_val, const GridOptions& options) {
  const auto points = grid.points();
  if (x_train.rows() != y_train.size() || x_val.rows() != y_val.size()) {
    fail(ErrorCode::kAlignmentError, "feature rows and labels differ in count");
  }
  if (x_train.cols() != x_val.cols()) fail(ErrorCode::kShapeError, "train and validation widths differ");
  if (y_val.empty()) fail(ErrorCode::kBadInput, "validation split is empty");

  std::vector<GridCandidate> candidates(points.size());
  std::vector<std::optional<ClassifierModel>> models(points.size());
  parallel_for(points.size(), options.threads, [&](std::size_t i) {
    auto& c = candidates[i];
    c.params = points[i];
    c.seed = mix_seed(options.seed, i);
    try {
      FitContext ctx{options.num_classes, c.seed, 1};
      auto model = fit_head(grid.head, x_train, y_train, c.params, ctx);
      c.val_accuracy = accuracy(y_val, predict_labels(model, x_val));
      models[i] = std::move(model);
    } catch (const Error& e) {
      c.error = e.what();
    }
  });

  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (c.val_accuracy) {
      spdlog::debug("grid {} {} val_accuracy={:.6f}", head_name(grid.head), c.params.dump(), *c.val_accuracy);
    } else {
      spdlog::debug("grid {} {} failed: {}", head_name(grid.head), c.params.dump(), c.error);
    }
    if (c.val_accuracy && (!best || *c.val_accuracy > *candidates[*best].val_accuracy)) best = i;
  }
  if (!best) {
    std::string causes;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      causes += "\n  " + candidates[i].params.dump() + ": " + candidates[i].error;
    }
    fail(ErrorCode::kGridExhausted, "every grid point failed:" + causes);
  }
  GridResult result{*best, candidates[*best].params, *candidates[*best].val_accuracy, std::move(candidates),
                    std::move(*models[*best])};
  spdlog::info("grid {}: best {} val_accuracy={:.6f}", head_name(grid.head), result.best_params.dump(),
               result.best_val_accuracy);
  return result;
}

json grid_result_to_json(const GridResult& result) {
  json candidates = json::array();
  for (std::size_t i = 0; i < result.candidates.size(); ++i) {
    const auto& c = result.candidates[i];
    candidates.push_back({{"index", i},
                          {"params", c.params},
                          {"seed", c.seed},
                          {"val_accuracy", c.val_accuracy ? json(*c.val_accuracy) : json(nullptr)},
                          {"error", c.error}});
  }
  return {{"best_index", result.best_index},
          {"best_params", result.best_params},
          {"best_val_accuracy", result.best_val_accuracy},
          {"candidates", candidates}};
}

// ---- run records ----------------------------------------------------------

double RunRecord::test_accuracy() const {
  if (metrics.is_object() && metrics.contains("aggregate")) {
    return metrics.at("aggregate").at("accuracy").get<double>();
  }
  if (confusion.total() == 0) fail(ErrorCode::kBadInput, "run record without metrics");
  return static_cast<double>(confusion.trace()) / static_cast<double>(confusion.total());
}

namespace {

const char* const kRecordFields[] = {
    "schema_version", "run_id",      "dataset_name",  "model_name",      "ensemble",
    "augmented",      "static_augmentation",          "selected_params", "best_val_accuracy",
    "grid",           "seed",        "manifest_hash", "manifest_path",   "feature_sources",
    "standardize",    "class_names", "metrics",       "confusion",       "cnn_training",
    "timestamps",
};

}  // namespace

json run_record_to_json(const RunRecord& r) {
  json doc = r.extra.is_object() ? r.extra : json::object();
  doc["schema_version"] = r.schema_version;
  doc["run_id"] = r.run_id;
  doc["dataset_name"] = r.dataset_name;
  doc["model_name"] = r.model_name;
  doc["ensemble"] = r.ensemble;
  doc["augmented"] = r.augmented;
  doc["static_augmentation"] = r.static_augmentation;
  doc["selected_params"] = r.selected_params;
  doc["best_val_accuracy"] = r.best_val_accuracy;
  doc["grid"] = r.grid;
  doc["seed"] = r.seed;
  doc["manifest_hash"] = r.manifest_hash;
  doc["manifest_path"] = r.manifest_path;
  doc["feature_sources"] = r.feature_sources;
  doc["standardize"] = r.standardize;
  doc["class_names"] = r.class_names;
  doc["metrics"] = r.metrics;
  doc["confusion"] = confusion_to_json(r.confusion);
  doc["cnn_training"] = r.cnn_training;
  doc["timestamps"] = r.timestamps;
  return doc;
}

RunRecord run_record_from_json(const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::kFormatError, "run record must be an object");
  RunRecord r;
  try {
    r.schema_version = doc.at("schema_version").get<int>();
    if (r.schema_version < 1 || r.schema_version > kRunRecordSchemaVersion) {
      fail(ErrorCode::kFormatError, "unsupported run record schema version " + std::to_string(r.schema_version));
    }
    r.run_id = doc.at("run_id").get<std::string>();
    r.dataset_name = doc.at("dataset_name").get<std::string>();
    r.model_name = doc.at("model_name").get<std::string>();
    r.ensemble = doc.at("ensemble");
    r.augmented = doc.at("augmented").get<bool>();
    r.static_augmentation = doc.at("static_augmentation").get<bool>();
    r.selected_params = doc.at("selected_params");
    r.best_val_accuracy = doc.at("best_val_accuracy").get<double>();
    r.grid = doc.at("grid");
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.manifest_hash = doc.at("manifest_hash").get<std::string>();
    r.manifest_path = doc.at("manifest_path").get<std::string>();
    r.feature_sources = doc.at("feature_sources");
    r.standardize = doc.at("standardize").get<bool>();
    r.class_names = doc.at("class_names").get<std::vector<std::string>>();
    r.metrics = doc.at("metrics");
    if (!r.metrics.is_object() || !r.metrics.contains("aggregate") ||
        !r.metrics.at("aggregate").at("accuracy").is_number()) {
      fail(ErrorCode::kFormatError, "run record metrics lack an aggregate accuracy");
    }
    r.confusion = confusion_from_json(doc.at("confusion"));
    r.cnn_training = doc.at("cnn_training");
    r.timestamps = doc.at("timestamps");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("malformed run record: ") + e.what());
  }
  r.extra = json::object();
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (std::find(std::begin(kRecordFields), std::end(kRecordFields), it.key()) == std::end(kRecordFields)) {
      r.extra[it.key()] = it.value();
    }
  }
  return r;
}

RunRecord read_run_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, path.string() + ": " + e.what());
  }
  return run_record_from_json(doc);
}

void write_run_record(const RunRecord& record, const std::filesystem::path& path) {
  write_text_atomic(path, run_record_to_json(record).dump(2) + "\n");
}

// ---- evaluation -----------------------------------------------------------

json evaluate_config_to_json(const EvaluateConfig& c) {
  json dirs = json::array();
  for (const auto& d : c.source_dirs) dirs.push_back(d.generic_string());
  return {{"dataset_name", c.dataset_name},
          {"manifest_path", c.manifest_path.generic_string()},
          {"source_dirs", dirs},
          {"ensemble", spec_to_json(c.spec)},
          {"grid", grid_to_json(c.grid ? *c.grid : default_grid(c.spec.head))},
          {"standardize", c.standardize},
          {"augmented", c.augmented},
          {"static_augmentation", c.static_augmentation},
          {"positive_class", c.positive_class ? json(*c.positive_class) : json(nullptr)},
          {"seed", c.seed},
          {"cnn_training", c.cnn_training}};
}

std::string derive_run_id(const EvaluateConfig& config) {
  return sha256_hex(evaluate_config_to_json(config).dump()).substr(0, 16);
}

EvaluateConfig evaluate_config_from_record(const RunRecord& record) {
  EvaluateConfig c;
  try {
    c.dataset_name = record.dataset_name;
    c.manifest_path = record.manifest_path;
    for (const auto& s : record.feature_sources) c.source_dirs.emplace_back(s.at("path").get<std::string>());
    if (record.ensemble.is_null()) fail(ErrorCode::kBadConfig, "record of a standalone model cannot be re-run");
    c.spec = spec_from_json(record.ensemble);
    c.grid = grid_from_json(record.grid);
    c.standardize = record.standardize;
    c.augmented = record.augmented;
    c.static_augmentation = record.static_augmentation;
    const auto& pos = record.metrics.at("positive_class");
    if (pos.is_string()) c.positive_class = pos.get<std::string>();
    c.seed = record.seed;
    c.run_id = record.run_id;
    c.cnn_training = record.cnn_training;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("run record cannot be replayed: ") + e.what());
  }
  return c;
}

std::filesystem::path run_directory(const std::filesystem::path& root, const std::string& dataset,
                                    const std::string& model, const std::string& run_id) {
  return root / sanitize(dataset) / sanitize(model) / sanitize(run_id);
}

PreparedRun prepare_run(const EvaluateConfig& config) {
  if (config.dataset_name.empty()) fail(ErrorCode::kBadConfig, "dataset name is required");
  if (config.spec.sources.empty()) fail(ErrorCode::kBadConfig, "ensemble has no sources");
  PreparedRun run;
  run.grid = config.grid ? *config.grid : default_grid(config.spec.head);
  if (run.grid.head != config.spec.head) {
    fail(ErrorCode::kBadConfig, "grid is for head '" + std::string(head_name(run.grid.head)) +
                                    "', ensemble uses '" + std::string(head_name(config.spec.head)) + "'");
  }
  run.grid.validate();

  run.bundle = load_bundle(config.manifest_path);
  const auto& bundle = run.bundle;
  std::vector<FeatureSource> loaded;
  for (const auto& dir : config.source_dirs) {
    loaded.push_back(load_feature_source(dir));
    const auto& s = loaded.back();
    run.source_info.push_back({{"name", s.name},
                               {"path", dir.generic_string()},
                               {"feature_width", s.feature_width},
                               {"manifest_hash", s.manifest_hash}});
  }
  run.sources = select_sources(loaded, config.spec);
  for (const auto& s : run.sources) {
    if (s.manifest_hash != bundle.manifest_hash) {
      fail(ErrorCode::kProvenanceError, "source '" + s.name + "' was computed from manifest " + s.manifest_hash +
                                            ", bundle manifest is " + bundle.manifest_hash);
    }
    for (Split split : kAllSplits) {
      if (s.split(split).rows() != bundle.labels(split).size()) {
        fail(ErrorCode::kAlignmentError, "source '" + s.name + "' split " + std::string(split_name(split)) +
                                             " has " + std::to_string(s.split(split).rows()) + " rows, bundle has " +
                                             std::to_string(bundle.labels(split).size()) + " labels");
      }
    }
  }

  if (config.positive_class) {
    const auto it = std::find(bundle.class_names.begin(), bundle.class_names.end(), *config.positive_class);
    if (it == bundle.class_names.end()) fail(ErrorCode::kBadConfig, "unknown positive class '" + *config.positive_class + "'");
    run.positive_class = static_cast<std::size_t>(it - bundle.class_names.begin());
  }

  EnsembleOptions eopts{config.standardize, bundle.class_names.size(), config.seed, config.threads};
  run.model = prepare_ensemble(config.spec, run.sources, eopts);
  for (Split split : kAllSplits) {
    const auto i = static_cast<std::size_t>(split);
    run.x[i] = ensemble_inputs(run.model, run.sources, split);
    run.y[i] = labels_of(bundle, split);
  }
  return run;
}

EvaluateResult evaluate_run(const EvaluateConfig& config) {
  const std::string started = utc_now();
  PreparedRun run = prepare_run(config);
  const auto& bundle = run.bundle;
  const auto& grid = run.grid;
  const std::size_t k = bundle.class_names.size();
  auto& model = run.model;
  const auto& x_train = run.x[0];
  const auto& x_val = run.x[1];
  const auto& x_test = run.x[2];
  const auto& y_train = run.y[0];
  const auto& y_val = run.y[1];
  const auto& y_test = run.y[2];
  const auto positive = run.positive_class;
  const auto& source_info = run.source_info;

  GridResult gr = grid_search(grid, x_train, y_train, x_val, y_val, {config.seed, k, config.threads});
  model.head = std::move(gr.best_model);
  model.head_params = gr.best_params;

  const Labels predicted = predict_labels(model.head, x_test);
  const ConfusionMatrix cm = confusion(y_test, predicted, k, bundle.class_names);
  const MetricsReport report = compute_metrics(cm, positive);

  RunRecord r;
  r.run_id = config.run_id.empty() ? derive_run_id(config) : config.run_id;
  r.dataset_name = config.dataset_name;
  r.model_name = ensemble_label(config.spec);
  r.ensemble = spec_to_json(config.spec);
  r.augmented = config.augmented;
  r.static_augmentation = config.static_augmentation;
  r.selected_params = gr.best_params;
  r.best_val_accuracy = gr.best_val_accuracy;
  r.grid = grid_to_json(grid);
  r.grid["search"] = grid_result_to_json(gr);
  r.seed = config.seed;
  r.manifest_hash = bundle.manifest_hash;
  r.manifest_path = config.manifest_path.generic_string();
  r.feature_sources = source_info;
  r.standardize = config.standardize;
  r.class_names = bundle.class_names;
  r.metrics = metrics_to_json(report);
  r.confusion = cm;
  r.cnn_training = config.cnn_training;

  EvaluateResult result{std::move(r), {}, std::move(model)};
  spdlog::info("{} on {}: test accuracy {}", result.record.model_name, result.record.dataset_name,
               format_percent(result.record.test_accuracy()));
  result.record.timestamps = {{"started", started}, {"finished", utc_now()}};
  if (!config.out_root.empty()) {
    result.run_dir = run_directory(config.out_root, config.dataset_name, result.record.model_name, result.record.run_id);
    write_text_atomic(result.run_dir / "model.json", ensemble_to_json(result.model).dump() + "\n");
    write_run_record(result.record, result.run_dir / "hyperparameters.json");
  }
  return result;
}

// ---- curation -------------------------------------------------------------

CurationConfig curation_config_from_json(const json& doc) {
  CurationConfig cfg;
  try {
    if (doc.contains("groups")) cfg.groups = doc.at("groups").get<std::map<std::string, std::string>>();
    if (doc.contains("dataset_order")) cfg.dataset_order = doc.at("dataset_order").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kBadConfig, std::string("malformed curation config: ") + e.what());
  }
  return cfg;
}

double weighted_average(const std::map<std::string, double>& accuracy, const CurationConfig& config) {
  if (accuracy.empty()) fail(ErrorCode::kBadInput, "weighted average of no datasets");
  std::map<std::string, std::pair<double, std::size_t>> groups;
  for (const auto& [dataset, acc] : accuracy) {
    const auto it = config.groups.find(dataset);
    const std::string group = it == config.groups.end() ? "dataset:" + dataset : "group:" + it->second;
    auto& g = groups[group];
    g.first += acc;
    g.second += 1;
  }
  double sum = 0;
  for (const auto& [name, g] : groups) sum += g.first / static_cast<double>(g.second);
  return sum / static_cast<double>(groups.size());
}

Leaderboard curate(const std::vector<std::filesystem::path>& roots, const CurationConfig& config) {
  std::set<std::string> files;
  for (const auto& root : roots) {
    std::error_code ec;
    if (std::filesystem::is_regular_file(root, ec)) {
      files.insert(root.lexically_normal().generic_string());
      continue;
    }
    if (!std::filesystem::is_directory(root, ec)) fail(ErrorCode::kIoError, "no such run directory " + root.string());
    for (auto it = std::filesystem::recursive_directory_iterator(root, ec);
         !ec && it != std::filesystem::recursive_directory_iterator(); it.increment(ec)) {
      if (it->is_regular_file() && it->path().filename() == "hyperparameters.json") {
        files.insert(it->path().lexically_normal().generic_string());
      }
    }
    if (ec) fail(ErrorCode::kIoError, "cannot scan " + root.string());
  }

  Leaderboard board;
  std::map<std::string, LeaderboardRow> rows;
  std::set<std::string> datasets;
  for (const auto& file : files) {
    RunRecord r;
    double acc = 0;
    try {
      r = read_run_record(file);
      acc = r.test_accuracy();
    } catch (const Error& e) {
      board.skipped.push_back({file, e.what()});
      spdlog::warn("skipping {}: {}", file, e.what());
      continue;
    }
    ++board.records_read;
    datasets.insert(r.dataset_name);
    auto& row = rows[r.model_name];
    row.model = r.model_name;
    const auto it = row.accuracy.find(r.dataset_name);
    // Files are visited in path order, so on equal accuracy the first path stays.
    if (it == row.accuracy.end() || acc > it->second) {
      row.accuracy[r.dataset_name] = acc;
      row.records[r.dataset_name] = file;
    }
  }
  if (board.records_read == 0) fail(ErrorCode::kNothingToCurate, "no parseable run records found");

  for (const auto& d : config.dataset_order) {
    if (datasets.erase(d)) board.datasets.push_back(d);
  }
  board.datasets.insert(board.datasets.end(), datasets.begin(), datasets.end());

  for (auto& [name, row] : rows) {
    row.weighted_average = weighted_average(row.accuracy, config);
    board.rows.push_back(std::move(row));
  }
  std::stable_sort(board.rows.begin(), board.rows.end(), [](const LeaderboardRow& a, const LeaderboardRow& b) {
    if (a.weighted_average != b.weighted_average) return a.weighted_average > b.weighted_average;
    return a.model < b.model;
  });
  return board;
}

std::string leaderboard_markdown(const Leaderboard& board) {
  std::ostringstream out;
  out << "| Rank | Model |";
  for (const auto& d : board.datasets) out << ' ' << d << " |";
  out << " WtdAvg |\n|---:|---|";
  for (std::size_t i = 0; i < board.datasets.size(); ++i) out << "---:|";
  out << "---:|\n";
  for (std::size_t i = 0; i < board.rows.size(); ++i) {
    const auto& row = board.rows[i];
    out << "| " << i + 1 << " | " << row.model << " |";
    for (const auto& d : board.datasets) {
      const auto it = row.accuracy.find(d);
      out << ' ' << (it == row.accuracy.end() ? std::string("-") : format_percent(it->second)) << " |";
    }
    out << ' ' << format_percent(row.weighted_average) << " |\n";
  }
  return out.str();
}

std::string leaderboard_csv(const Leaderboard& board) {
  std::ostringstream out;
  out << "rank,model";
  for (const auto& d : board.datasets) out << ',' << d;
  out << ",weighted_average\n";
  for (std::size_t i = 0; i < board.rows.size(); ++i) {
    const auto& row = board.rows[i];
    out << i + 1 << ',' << row.model;
    for (const auto& d : board.datasets) {
      const auto it = row.accuracy.find(d);
      out << ',' << (it == row.accuracy.end() ? std::string() : format_percent(it->second));
    }
    out << ',' << format_percent(row.weighted_average) << '\n';
  }
  return out.str();
}

json leaderboard_to_json(const Leaderboard& board) {
  json rows = json::array();
  for (const auto& row : board.rows) {
    rows.push_back({{"model", row.model},
                    {"accuracy", row.accuracy},
                    {"records", row.records},
                    {"weighted_average", row.weighted_average}});
  }
  json skipped = json::array();
  for (const auto& s : board.skipped) skipped.push_back({{"path", s.path}, {"reason", s.reason}});
  return {{"datasets", board.datasets}, {"rows", rows}, {"skipped", skipped}, {"records_read", board.records_read}};
}

// ---- challenge submission -------------------------------------------------

std::string challenge_csv_text(std::span<const std::int64_t> predictions, const std::vector<std::string>& ids) {
  if (predictions.size() != ids.size()) {
    fail(ErrorCode::kShapeError, std::to_string(ids.size()) + " image ids for " + std::to_string(predictions.size()) +
                                     " predictions");
  }
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i].find_first_of(",\n\r") != std::string::npos) {
      fail(ErrorCode::kBadInput, "image id '" + ids[i] + "' contains a separator");
    }
    out += ids[i] + "," + std::to_string(predictions[i]) + "\n";
  }
  return out;
}

std::vector<std::pair<std::string, std::int64_t>> parse_challenge_csv(const std::string& text) {
  std::vector<std::pair<std::string, std::int64_t>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) fail(ErrorCode::kFormatError, "line " + std::to_string(number) + " has no comma");
    try {
      std::size_t used = 0;
      const auto label = std::stoll(line.substr(comma + 1), &used);
      if (used != line.size() - comma - 1) throw std::invalid_argument("trailing");
      rows.emplace_back(line.substr(0, comma), label);
    } catch (const std::logic_error&) {
      fail(ErrorCode::kFormatError, "line " + std::to_string(number) + " has no integer class index");
    }
  }
  return rows;
}

Labels emit_challenge_csv(const EnsembleModel& model, std::span<const FeatureSource> sources, Split split,
                          const std::vector<std::string>& ids, const std::filesystem::path& out) {
  const auto selected = select_sources(sources, model.spec);
  const std::size_t rows = selected.empty() ? 0 : selected.front().split(split).rows();
  if (rows != ids.size()) {
    fail(ErrorCode::kShapeError, std::to_string(ids.size()) + " image ids for " + std::to_string(rows) + " feature rows");
  }
  Labels predicted;
  if (rows > 0) predicted = predict_ensemble(model, selected, split, ProvenanceCheck::kSourcesOnly);
  write_text_atomic(out, challenge_csv_text(predicted, ids));
  return predicted;
}

}  // namespace histostack
