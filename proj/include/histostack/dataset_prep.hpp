#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "histostack/manifest.hpp"
#include "histostack/tensor_store.hpp"

namespace histostack {

struct CorpusEntry {
  std::string path;  // relative to root, '/' separated
  std::string class_name;
  std::string hash;
};

// Images found under root/<class>/; entries sorted by relative path.
struct LabeledCorpus {
  std::filesystem::path root;
  std::vector<std::string> class_names;  // lexicographic; index = label
  std::vector<CorpusEntry> entries;

  std::int64_t class_index(const std::string& name) const;
};

using SplitRatios = std::array<double, 3>;

struct SplitAssignment {
  std::uint64_t seed = 0;
  SplitRatios ratios{};
  std::vector<Split> assignment;  // parallel to LabeledCorpus::entries
};

struct LeakOccurrence {
  std::string path;
  Split split;
};

struct LeakFinding {
  std::string hash;
  std::vector<LeakOccurrence> occurrences;
};

struct LeakReport {
  std::vector<LeakFinding> findings;  // sorted by hash
  bool clean() const { return findings.empty(); }
};

struct ImageSize {
  std::size_t height = 0;
  std::size_t width = 0;
};

bool is_image_file(const std::filesystem::path& path);

// Every image is read, hashed and test-decoded. Hashing and decoding may run on
// `threads` workers; output order does not depend on it.
LabeledCorpus scan_corpus(const std::filesystem::path& root, int threads = 1);

// Per class: shuffle with a seed-derived stream, then hand out
// largest-remainder quotas to train, val and test in that order.
SplitAssignment stratified_split(const LabeledCorpus& corpus, SplitRatios ratios,
                                 std::uint64_t seed);

// Per-split entry counts for a class of size n (largest remainder, ties to the
// earlier split).
std::array<std::size_t, 3> split_quotas(std::size_t n, SplitRatios ratios);

LeakReport leak_check(const SplitAssignment& assignment, const LabeledCorpus& corpus);
LeakReport leak_check(const Manifest& manifest);

Manifest make_manifest(const SplitAssignment& assignment, const LabeledCorpus& corpus,
                       ImageSize size);

// Decodes, resizes and stacks every split into uint8 [n, h, w, 3] tensors with
// int64 labels, writes them plus manifest.json into out_dir and returns the
// loaded bundle. Refuses to run when leak_check is not clean.
DatasetBundle materialize_bundle(const SplitAssignment& assignment, const LabeledCorpus& corpus,
                                 ImageSize size, const std::filesystem::path& out_dir,
                                 int threads = 1);

// Rebuilds the corpus/assignment pair recorded in an existing manifest so a
// bundle can be re-materialized (for example at another image size).
std::pair<LabeledCorpus, SplitAssignment> corpus_from_manifest(const Manifest& manifest,
                                                               const std::filesystem::path& root);

nlohmann::json leak_report_to_json(const LeakReport& report);

}  // namespace histostack
