#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace histostack {

enum class Split { kTrain = 0, kVal = 1, kTest = 2 };

inline constexpr std::array<Split, 3> kAllSplits = {Split::kTrain, Split::kVal, Split::kTest};

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

struct ManifestEntry {
  std::string path;  // relative to the corpus root, '/' separated
  std::string class_name;
  std::string hash;  // SHA-256 of the raw file bytes
  Split split = Split::kTrain;
  // Set for augmented derivatives: index of the original image within the
  // parent split and the variant number (0 = original).
  std::optional<std::int64_t> source_index;
  std::optional<std::int64_t> variant;
};

// Dataset description written next to a serialized bundle.
struct Manifest {
  int version = 1;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.6, 0.2, 0.2};
  std::vector<std::string> class_names;
  std::vector<ManifestEntry> entries;
  std::array<std::size_t, 2> image_size{0, 0};  // (h, w)
  std::string root;                             // corpus root the entries are relative to
  std::map<std::string, std::string> tensors;   // role -> file name relative to manifest
  nlohmann::json augmentation;                  // provenance of augmented splits, or null
  nlohmann::json extra = nlohmann::json::object();  // unknown keys, preserved
};

nlohmann::json manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::json& doc);

// Canonical text form: 2-space indented JSON plus a trailing newline.
std::string manifest_text(const Manifest& manifest);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace histostack
