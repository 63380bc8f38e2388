#include "histostack/manifest.hpp"

#include <fstream>
#include <set>

#include "histostack/error.hpp"

namespace histostack {

using nlohmann::json;

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  fail(ErrorCode::kBadConfig, "unknown split '" + std::string(name) + "'");
}

json manifest_to_json(const Manifest& m) {
  json doc = m.extra.is_object() ? m.extra : json::object();
  doc["version"] = m.version;
  doc["seed"] = m.seed;
  doc["ratios"] = m.ratios;
  doc["class_names"] = m.class_names;
  doc["image_size"] = m.image_size;
  if (!m.root.empty()) doc["root"] = m.root;
  json entries = json::array();
  for (const auto& e : m.entries) {
    json item = {{"path", e.path}, {"class", e.class_name}, {"hash", e.hash},
                 {"split", split_name(e.split)}};
    if (e.source_index) item["source_index"] = *e.source_index;
    if (e.variant) item["variant"] = *e.variant;
    entries.push_back(std::move(item));
  }
  doc["entries"] = std::move(entries);
  doc["tensors"] = m.tensors;
  doc["augmentation"] = m.augmentation;
  return doc;
}

Manifest manifest_from_json(const json& doc) {
  static const std::set<std::string> kKnown = {"version", "seed", "ratios", "class_names",
                                              "image_size", "entries", "tensors", "root",
                                              "augmentation"};
  try {
    Manifest m;
    m.version = doc.at("version").get<int>();
    m.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("ratios")) m.ratios = doc.at("ratios").get<std::array<double, 3>>();
    m.class_names = doc.at("class_names").get<std::vector<std::string>>();
    if (doc.contains("image_size")) {
      m.image_size = doc.at("image_size").get<std::array<std::size_t, 2>>();
    }
    m.root = doc.value("root", std::string{});
    for (const auto& item : doc.value("entries", json::array())) {
      ManifestEntry e;
      e.path = item.at("path").get<std::string>();
      e.class_name = item.at("class").get<std::string>();
      e.hash = item.value("hash", std::string{});
      e.split = parse_split(item.at("split").get<std::string>());
      if (item.contains("source_index")) e.source_index = item.at("source_index").get<std::int64_t>();
      if (item.contains("variant")) e.variant = item.at("variant").get<std::int64_t>();
      m.entries.push_back(std::move(e));
    }
    if (doc.contains("tensors")) {
      m.tensors = doc.at("tensors").get<std::map<std::string, std::string>>();
    }
    m.augmentation = doc.value("augmentation", json());
    for (const auto& [key, value] : doc.items()) {
      if (!kKnown.contains(key)) m.extra[key] = value;
    }
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::kBundleInvalid, std::string("malformed manifest: ") + e.what());
  }
}

std::string manifest_text(const Manifest& manifest) {
  return manifest_to_json(manifest).dump(2) + "\n";
}

void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out << manifest_text(manifest);
  if (!out) fail(ErrorCode::kIoError, "write failed: " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kBundleInvalid, "manifest is not valid JSON: " + path.string());
  }
  return manifest_from_json(doc);
}

}  // namespace histostack
