#include "histostack/stacker.hpp"

#include <cmath>
#include <fstream>

#include "histostack/hashing.hpp"
#include "histostack/tensor_store.hpp"

namespace histostack {
namespace {

using nlohmann::json;

const std::array<std::vector<std::string>, 4> kTriples = {{
    {"densenet121", "inceptionv3", "nasnetmobile"},
    {"efficientnetv2b1", "inceptionv3", "resnet50"},
    {"densenet121", "inceptionv3", "resnet50"},
    {"densenet121", "inceptionv3", "mobilenetv2"},
}};

void check_recipe(const EnsembleModel& model, std::span<const FeatureSource> sources, ProvenanceCheck check) {
  if (sources.size() != model.spec.sources.size()) {
    fail(ErrorCode::kProvenanceError, "ensemble expects " + std::to_string(model.spec.sources.size()) + " sources");
  }
  for (std::size_t s = 0; s < sources.size(); ++s) {
    if (sources[s].name != model.spec.sources[s]) {
      fail(ErrorCode::kProvenanceError, "source " + std::to_string(s) + " is '" + sources[s].name + "', model expects '" +
                                            model.spec.sources[s] + "'");
    }
    if (sources[s].feature_width != model.source_widths[s]) {
      fail(ErrorCode::kProvenanceError, "source '" + sources[s].name + "' width changed since fitting");
    }
    if (check == ProvenanceCheck::kStrict && sources[s].manifest_hash != model.manifest_hash) {
      fail(ErrorCode::kProvenanceError, "source '" + sources[s].name + "' was computed from a different manifest");
    }
  }
}

}  // namespace

void validate_feature_source(const FeatureSource& source) {
  if (source.name.empty()) fail(ErrorCode::kBadInput, "feature source without a name");
  for (Split s : kAllSplits) {
    const auto& m = source.split(s);
    if (m.cols() != source.feature_width) {
      fail(ErrorCode::kShapeError, "source '" + source.name + "' split " + std::string(split_name(s)) + " has width " +
                                       std::to_string(m.cols()) + ", declared " + std::to_string(source.feature_width));
    }
  }
}

FeatureSource load_feature_source(const std::filesystem::path& dir) {
  const auto meta_path = dir / "source.json";
  std::ifstream in(meta_path);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + meta_path.string());
  FeatureSource source;
  try {
    const auto meta = json::parse(in);
    source.name = meta.at("name").get<std::string>();
    source.feature_width = meta.at("feature_width").get<std::size_t>();
    source.manifest_hash = meta.at("manifest_hash").get<std::string>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormatError, meta_path.string() + ": " + e.what());
  }
  for (Split s : kAllSplits) {
    const auto t = read_tensor(dir / (std::string(split_name(s)) + ".npy"));
    if (t.rank() != 2) fail(ErrorCode::kShapeError, "feature maps must be 2-d");
    source.split(s) = FeatureMatrix::from_tensor(t);
  }
  validate_feature_source(source);
  return source;
}

void save_feature_source(const FeatureSource& source, const std::filesystem::path& dir) {
  validate_feature_source(source);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create " + dir.string());
  for (Split s : kAllSplits) write_tensor(source.split(s).to_tensor(), dir / (std::string(split_name(s)) + ".npy"));
  const json meta = {{"name", source.name}, {"feature_width", source.feature_width}, {"manifest_hash", source.manifest_hash}};
  std::ofstream out(dir / "source.json", std::ios::binary);
  out << meta.dump(2) << '\n';
  if (!out) fail(ErrorCode::kIoError, "cannot write " + (dir / "source.json").string());
}

FeatureSource permute_rows(const FeatureSource& source, Split split, std::span<const std::size_t> perm) {
  const auto& m = source.split(split);
  if (perm.size() != m.rows()) fail(ErrorCode::kAlignmentError, "permutation length does not match the row count");
  std::vector<char> seen(perm.size(), 0);
  for (auto p : perm) {
    if (p >= perm.size() || seen[p]) fail(ErrorCode::kBadInput, "not a permutation");
    seen[p] = 1;
  }
  FeatureSource out = source;
  out.split(split) = m.select_rows(perm);
  std::string recipe = source.manifest_hash + ":" + std::string(split_name(split)) + ":";
  for (auto p : perm) recipe += std::to_string(p) + ",";
  out.manifest_hash = sha256_hex(recipe);
  return out;
}

FeatureMatrix concat_features(std::span<const FeatureSource> sources, Split split) {
  if (sources.empty()) fail(ErrorCode::kBadInput, "no feature sources");
  const std::size_t rows = sources[0].split(split).rows();
  std::size_t width = 0;
  for (const auto& s : sources) {
    if (s.manifest_hash != sources[0].manifest_hash) {
      fail(ErrorCode::kProvenanceError, "sources '" + sources[0].name + "' and '" + s.name +
                                            "' come from different manifests");
    }
    if (s.split(split).rows() != rows) {
      fail(ErrorCode::kAlignmentError, "source '" + s.name + "' has " + std::to_string(s.split(split).rows()) +
                                           " rows, expected " + std::to_string(rows));
    }
    width += s.split(split).cols();
  }
  FeatureMatrix out(rows, width);
  for (std::size_t i = 0; i < rows; ++i) {
    auto dst = out.row(i).begin();
    for (const auto& s : sources) dst = std::copy(s.split(split).row(i).begin(), s.split(split).row(i).end(), dst);
  }
  return out;
}

std::vector<std::string> ensemble_triple(int number) {
  if (number < 1 || number > static_cast<int>(kTriples.size())) {
    fail(ErrorCode::kBadConfig, "no ensemble number " + std::to_string(number));
  }
  return kTriples[static_cast<std::size_t>(number - 1)];
}

EnsembleSpec parse_ensemble_spec(std::string_view shorthand) {
  if (shorthand.size() != 2 || shorthand[0] < '1' || shorthand[0] > '9') {
    fail(ErrorCode::kBadConfig, "ensemble shorthand must look like '3c', got '" + std::string(shorthand) + "'");
  }
  EnsembleSpec spec;
  spec.sources = ensemble_triple(shorthand[0] - '0');
  switch (shorthand[1]) {
    case 'a': spec.head = HeadKind::kLR; break;
    case 'b': spec.head = HeadKind::kSVC; break;
    case 'c': spec.head = HeadKind::kRF; break;
    case 'd': spec.head = HeadKind::kGBDT; break;
    default: fail(ErrorCode::kBadConfig, "ensemble head letter must be a-d");
  }
  spec.shorthand = std::string(shorthand);
  return spec;
}

EnsembleSpec custom_ensemble(std::vector<std::string> sources, HeadKind head) {
  if (sources.size() < 1 || sources.size() > 3) fail(ErrorCode::kBadConfig, "an ensemble takes one to three sources");
  return {std::move(sources), head, {}};
}

std::string ensemble_label(const EnsembleSpec& spec) {
  if (!spec.shorthand.empty()) return "ens" + spec.shorthand;
  std::string label;
  for (const auto& s : spec.sources) label += (label.empty() ? "" : "+") + s;
  return label + "/" + std::string(head_name(spec.head));
}

std::vector<FeatureSource> select_sources(std::span<const FeatureSource> available, const EnsembleSpec& spec) {
  std::vector<FeatureSource> out;
  for (const auto& name : spec.sources) {
    auto it = std::find_if(available.begin(), available.end(), [&](const FeatureSource& s) { return s.name == name; });
    if (it == available.end()) fail(ErrorCode::kProvenanceError, "feature source '" + name + "' not provided");
    out.push_back(*it);
  }
  return out;
}

EnsembleModel prepare_ensemble(const EnsembleSpec& spec, std::span<const FeatureSource> sources,
                               const EnsembleOptions& options) {
  EnsembleModel model;
  model.spec = spec;
  for (const auto& s : sources) model.source_widths.push_back(s.feature_width);
  model.manifest_hash = sources.empty() ? std::string() : sources[0].manifest_hash;
  check_recipe(model, sources, ProvenanceCheck::kStrict);
  const auto x = concat_features(sources, Split::kTrain);
  model.standardize = options.standardize;
  if (options.standardize) {
    const std::size_t n = x.rows(), p = x.cols();
    model.column_mean.assign(p, 0.0);
    model.column_scale.assign(p, 1.0);
    for (std::size_t j = 0; j < p; ++j) {
      double mean = 0;
      for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
      mean /= static_cast<double>(std::max<std::size_t>(n, 1));
      double var = 0;
      for (std::size_t i = 0; i < n; ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
      var /= static_cast<double>(std::max<std::size_t>(n, 1));
      model.column_mean[j] = mean;
      model.column_scale[j] = var > 0 ? std::sqrt(var) : 1.0;
    }
  }
  return model;
}

EnsembleModel fit_ensemble(const EnsembleSpec& spec, std::span<const FeatureSource> sources,
                           std::span<const std::int64_t> y_train, const json& head_params,
                           const EnsembleOptions& options) {
  auto model = prepare_ensemble(spec, sources, options);
  const auto x = ensemble_inputs(model, sources, Split::kTrain);
  model.head_params = head_params;
  model.head = fit_head(spec.head, x, y_train, head_params,
                        {.num_classes = options.num_classes, .seed = options.seed, .threads = options.threads});
  return model;
}

FeatureMatrix ensemble_inputs(const EnsembleModel& model, std::span<const FeatureSource> sources, Split split,
                              ProvenanceCheck check) {
  check_recipe(model, sources, check);
  auto x = concat_features(sources, split);
  if (model.standardize) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < x.cols(); ++j) {
        x(i, j) = static_cast<float>((x(i, j) - model.column_mean[j]) / model.column_scale[j]);
      }
    }
  }
  return x;
}

Labels predict_ensemble(const EnsembleModel& model, std::span<const FeatureSource> sources, Split split,
                        ProvenanceCheck check) {
  return predict_labels(model.head, ensemble_inputs(model, sources, split, check));
}

json ensemble_to_json(const EnsembleModel& model) {
  return {{"schema_version", kModelSchemaVersion},
          {"sources", model.spec.sources},
          {"head", head_name(model.spec.head)},
          {"shorthand", model.spec.shorthand},
          {"source_widths", model.source_widths},
          {"manifest_hash", model.manifest_hash},
          {"standardize", model.standardize},
          {"column_mean", model.column_mean},
          {"column_scale", model.column_scale},
          {"head_params", model.head_params},
          {"model", model_to_json(model.head)}};
}

EnsembleModel ensemble_from_json(const json& doc) {
  try {
    EnsembleModel m;
    m.spec.sources = doc.at("sources").get<std::vector<std::string>>();
    m.spec.head = parse_head(doc.at("head").get<std::string>());
    m.spec.shorthand = doc.at("shorthand").get<std::string>();
    m.source_widths = doc.at("source_widths").get<std::vector<std::size_t>>();
    m.manifest_hash = doc.at("manifest_hash").get<std::string>();
    m.standardize = doc.at("standardize").get<bool>();
    m.column_mean = doc.at("column_mean").get<std::vector<double>>();
    m.column_scale = doc.at("column_scale").get<std::vector<double>>();
    m.head_params = doc.at("head_params");
    m.head = model_from_json(doc.at("model"));
    if (m.source_widths.size() != m.spec.sources.size()) fail(ErrorCode::kFormatError, "source widths mismatch");
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("malformed ensemble document: ") + e.what());
  }
}

}  // namespace histostack
