#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "histostack/manifest.hpp"
#include "histostack/stacker.hpp"

namespace histostack {

enum class SyntheticKind {
  // Binary. Column 0 of the first source is signal + nuisance, column 0 of
  // the second is the same nuisance; no single source carries usable signal
  // but their difference separates the classes. Other columns are noise.
  kJoint,
  // Every source holds well separated class clusters.
  kSeparable,
};

std::string_view synthetic_kind_name(SyntheticKind kind);
SyntheticKind parse_synthetic_kind(std::string_view name);

struct SyntheticConfig {
  SyntheticKind kind = SyntheticKind::kJoint;
  std::array<std::size_t, 3> split_sizes{300, 100, 100};
  std::size_t num_classes = 2;  // kSeparable only
  std::vector<std::string> source_names{"densenet121", "inceptionv3", "nasnetmobile"};
  std::size_t width = 0;  // 0: 1 for kJoint, 4 for kSeparable
  double nuisance = 8.0;
  double noise = 0.05;
  std::uint64_t seed = 0;
};

// A dataset of placeholder images (1x1 black pixels) whose labels and
// manifest are real, plus feature sources bound to that manifest's hash.
struct SyntheticDataset {
  Manifest manifest;
  std::string manifest_hash;
  std::array<Labels, 3> labels;
  std::vector<FeatureSource> sources;
};

SyntheticDataset make_synthetic(const SyntheticConfig& config);

struct SyntheticLayout {
  std::filesystem::path manifest_path;
  std::vector<std::filesystem::path> source_dirs;
};

// Writes <out>/bundle/{manifest.json,*.npy} and <out>/features/<name>/.
SyntheticLayout write_synthetic(const SyntheticDataset& data, const std::filesystem::path& out_dir);

}  // namespace histostack
