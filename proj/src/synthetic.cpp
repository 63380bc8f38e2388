#include "histostack/synthetic.hpp"

#include <numeric>

#include "histostack/hashing.hpp"
#include "histostack/rng.hpp"
#include "histostack/tensor_store.hpp"

namespace histostack {
namespace {

const char* const kRoles[] = {"x_train", "y_train", "x_val", "y_val", "x_test", "y_test"};

Labels balanced_labels(std::size_t n, std::size_t k, Rng& rng) {
  Labels y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<std::int64_t>(i % k);
  rng.shuffle(y.begin(), y.end());
  return y;
}

}  // namespace

std::string_view synthetic_kind_name(SyntheticKind kind) {
  return kind == SyntheticKind::kJoint ? "joint" : "separable";
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "joint") return SyntheticKind::kJoint;
  if (name == "separable") return SyntheticKind::kSeparable;
  fail(ErrorCode::kBadConfig, "unknown synthetic task '" + std::string(name) + "'");
}

SyntheticDataset make_synthetic(const SyntheticConfig& config) {
  SyntheticConfig cfg = config;
  if (cfg.width == 0) cfg.width = cfg.kind == SyntheticKind::kJoint ? 1 : 4;
  const std::size_t k = cfg.kind == SyntheticKind::kJoint ? 2 : cfg.num_classes;
  if (k < 2) fail(ErrorCode::kBadConfig, "synthetic tasks need at least two classes");
  if (cfg.kind == SyntheticKind::kJoint && cfg.source_names.size() < 2) {
    fail(ErrorCode::kBadConfig, "the joint task needs at least two sources");
  }
  if (cfg.source_names.empty()) fail(ErrorCode::kBadConfig, "no source names");
  for (auto n : cfg.split_sizes) {
    if (n < k) fail(ErrorCode::kBadConfig, "every split needs at least one sample per class");
  }

  SyntheticDataset data;
  Rng label_rng(mix_seed(cfg.seed, 0));
  for (Split s : kAllSplits) {
    data.labels[static_cast<std::size_t>(s)] = balanced_labels(cfg.split_sizes[static_cast<std::size_t>(s)], k, label_rng);
  }

  auto& m = data.manifest;
  m.seed = cfg.seed;
  const double total = static_cast<double>(cfg.split_sizes[0] + cfg.split_sizes[1] + cfg.split_sizes[2]);
  for (std::size_t s = 0; s < 3; ++s) m.ratios[s] = static_cast<double>(cfg.split_sizes[s]) / total;
  for (std::size_t c = 0; c < k; ++c) m.class_names.push_back("class_" + std::to_string(c));
  m.image_size = {1, 1};
  for (Split s : kAllSplits) {
    const auto& y = data.labels[static_cast<std::size_t>(s)];
    for (std::size_t i = 0; i < y.size(); ++i) {
      ManifestEntry e;
      e.path = "synthetic/" + std::string(split_name(s)) + "/" + std::to_string(i);
      e.class_name = m.class_names[static_cast<std::size_t>(y[i])];
      e.hash = sha256_hex(e.path);
      e.split = s;
      m.entries.push_back(std::move(e));
    }
  }
  for (const char* role : kRoles) m.tensors[role] = std::string(role) + ".npy";
  m.extra["synthetic"] = {{"kind", synthetic_kind_name(cfg.kind)},
                          {"width", cfg.width},
                          {"nuisance", cfg.nuisance},
                          {"noise", cfg.noise},
                          {"sources", cfg.source_names}};
  data.manifest_hash = sha256_hex(manifest_text(m));

  // Cluster centres for the separable task, per (source, class, column).
  Rng centre_rng(mix_seed(cfg.seed, 1));
  std::vector<double> centres(cfg.source_names.size() * k * cfg.width);
  for (auto& c : centres) c = 3.0 * centre_rng.normal();

  for (std::size_t src = 0; src < cfg.source_names.size(); ++src) {
    FeatureSource fs;
    fs.name = cfg.source_names[src];
    fs.feature_width = cfg.width;
    fs.manifest_hash = data.manifest_hash;
    data.sources.push_back(std::move(fs));
  }
  for (Split s : kAllSplits) {
    const auto& y = data.labels[static_cast<std::size_t>(s)];
    const std::size_t n = y.size();
    for (auto& fs : data.sources) fs.split(s) = FeatureMatrix(n, cfg.width);
    Rng rng(mix_seed(cfg.seed, 2 + static_cast<std::uint64_t>(s)));
    for (std::size_t i = 0; i < n; ++i) {
      const auto cls = static_cast<std::size_t>(y[i]);
      const double shared = cfg.nuisance * rng.normal();
      for (std::size_t src = 0; src < data.sources.size(); ++src) {
        auto row = data.sources[src].split(s).row(i);
        for (std::size_t j = 0; j < cfg.width; ++j) {
          double v;
          if (cfg.kind == SyntheticKind::kSeparable) {
            v = centres[(src * k + cls) * cfg.width + j] + 0.3 * rng.normal();
          } else if (j == 0 && src == 0) {
            v = (cls == 1 ? 1.0 : -1.0) + shared + cfg.noise * rng.normal();
          } else if (j == 0 && src == 1) {
            v = shared + cfg.noise * rng.normal();
          } else {
            v = rng.normal();
          }
          row[j] = static_cast<float>(v);
        }
      }
    }
  }
  return data;
}

SyntheticLayout write_synthetic(const SyntheticDataset& data, const std::filesystem::path& out_dir) {
  SyntheticLayout layout;
  const auto bundle_dir = out_dir / "bundle";
  auto placeholder = [](std::size_t n) {
    return Tensor::from<std::uint8_t>({n, 1, 1, 3}, std::vector<std::uint8_t>(n * 3, 0));
  };
  auto labels = [](const Labels& y) { return Tensor::from<std::int64_t>({y.size()}, y); };
  const auto hash = save_bundle(bundle_dir, data.manifest, placeholder(data.labels[0].size()), labels(data.labels[0]),
                                placeholder(data.labels[1].size()), labels(data.labels[1]),
                                placeholder(data.labels[2].size()), labels(data.labels[2]));
  if (hash != data.manifest_hash) fail(ErrorCode::kProvenanceError, "written manifest hash differs from the recorded one");
  layout.manifest_path = bundle_dir / "manifest.json";
  for (const auto& fs : data.sources) {
    const auto dir = out_dir / "features" / fs.name;
    save_feature_source(fs, dir);
    layout.source_dirs.push_back(dir);
  }
  return layout;
}

}  // namespace histostack
