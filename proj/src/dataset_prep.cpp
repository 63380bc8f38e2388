#include "histostack/dataset_prep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "histostack/hashing.hpp"
#include "histostack/image.hpp"
#include "histostack/parallel.hpp"
#include "histostack/rng.hpp"

namespace histostack {
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_ratios(const SplitRatios& r) {
  double sum = 0;
  for (double v : r) {
    if (!std::isfinite(v) || v <= 0) {
      fail(ErrorCode::kBadRatios, "every split ratio must be positive");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail(ErrorCode::kBadRatios, "ratios must sum to 1");
}

}  // namespace

std::int64_t LabeledCorpus::class_index(const std::string& name) const {
  const auto it = std::lower_bound(class_names.begin(), class_names.end(), name);
  if (it == class_names.end() || *it != name) fail(ErrorCode::kBadLabel, "unknown class " + name);
  return it - class_names.begin();
}

bool is_image_file(const fs::path& path) {
  static const std::set<std::string> kExt = {".png", ".jpg", ".jpeg", ".bmp",
                                            ".tif", ".tiff", ".ppm", ".pgm"};
  const auto name = path.filename().string();
  if (name.empty() || name[0] == '.') return false;
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return kExt.contains(ext);
}

LabeledCorpus scan_corpus(const fs::path& root, int threads) {
  if (!fs::is_directory(root)) fail(ErrorCode::kIoError, root.string() + " is not a directory");
  LabeledCorpus corpus;
  corpus.root = root;
  for (const auto& dirent : fs::directory_iterator(root)) {
    const auto name = dirent.path().filename().string();
    if (dirent.is_directory() && !name.empty() && name[0] != '.') corpus.class_names.push_back(name);
  }
  std::sort(corpus.class_names.begin(), corpus.class_names.end());
  if (corpus.class_names.empty()) fail(ErrorCode::kEmptyClass, "no class directories under " + root.string());

  for (const auto& cls : corpus.class_names) {
    std::vector<std::string> files;
    for (const auto& dirent : fs::recursive_directory_iterator(root / cls)) {
      if (dirent.is_regular_file() && is_image_file(dirent.path())) {
        files.push_back(fs::relative(dirent.path(), root).generic_string());
      }
    }
    if (files.empty()) fail(ErrorCode::kEmptyClass, cls);
    for (auto& f : files) corpus.entries.push_back({std::move(f), cls, {}});
  }
  std::sort(corpus.entries.begin(), corpus.entries.end(),
            [](const CorpusEntry& a, const CorpusEntry& b) { return a.path < b.path; });

  parallel_for(corpus.entries.size(), threads, [&](std::size_t i) {
    auto& entry = corpus.entries[i];
    const auto bytes = slurp(root / entry.path);
    entry.hash = sha256_hex(bytes);
    (void)decode_image(bytes, entry.path);
  });
  return corpus;
}

std::array<std::size_t, 3> split_quotas(std::size_t n, SplitRatios ratios) {
  std::array<std::size_t, 3> quota{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const double exact = ratios[s] * static_cast<double>(n);
    quota[s] = static_cast<std::size_t>(std::floor(exact));
    remainder[s] = exact - static_cast<double>(quota[s]);
    assigned += quota[s];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b] + 1e-12; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++quota[order[i % 3]];
  return quota;
}

SplitAssignment stratified_split(const LabeledCorpus& corpus, SplitRatios ratios,
                                 std::uint64_t seed) {
  check_ratios(ratios);
  SplitAssignment out;
  out.seed = seed;
  out.ratios = ratios;
  out.assignment.assign(corpus.entries.size(), Split::kTrain);
  for (std::size_t c = 0; c < corpus.class_names.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
      if (corpus.entries[i].class_name == corpus.class_names[c]) members.push_back(i);
    }
    if (members.size() < 3) {
      fail(ErrorCode::kClassTooSmall, corpus.class_names[c] + " has " +
                                          std::to_string(members.size()) + " entries, need 3");
    }
    Rng rng(mix_seed(seed, c));
    rng.shuffle(members.begin(), members.end());
    const auto quota = split_quotas(members.size(), ratios);
    std::size_t pos = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t q = 0; q < quota[s]; ++q) out.assignment[members[pos++]] = kAllSplits[s];
    }
  }
  return out;
}

namespace {

LeakReport collect_leaks(const std::vector<std::tuple<std::string, std::string, Split>>& items) {
  std::map<std::string, std::vector<LeakOccurrence>> by_hash;
  for (const auto& [hash, path, split] : items) by_hash[hash].push_back({path, split});
  LeakReport report;
  for (auto& [hash, occ] : by_hash) {
    std::set<Split> splits;
    for (const auto& o : occ) splits.insert(o.split);
    if (splits.size() > 1) report.findings.push_back({hash, std::move(occ)});
  }
  return report;
}

}  // namespace

LeakReport leak_check(const SplitAssignment& assignment, const LabeledCorpus& corpus) {
  if (assignment.assignment.size() != corpus.entries.size()) {
    fail(ErrorCode::kShapeError, "assignment does not cover the corpus");
  }
  std::vector<std::tuple<std::string, std::string, Split>> items;
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    items.emplace_back(corpus.entries[i].hash, corpus.entries[i].path, assignment.assignment[i]);
  }
  return collect_leaks(items);
}

LeakReport leak_check(const Manifest& manifest) {
  std::vector<std::tuple<std::string, std::string, Split>> items;
  for (const auto& e : manifest.entries) {
    if (!e.hash.empty()) items.emplace_back(e.hash, e.path, e.split);
  }
  return collect_leaks(items);
}

nlohmann::json leak_report_to_json(const LeakReport& report) {
  nlohmann::json findings = nlohmann::json::array();
  for (const auto& f : report.findings) {
    nlohmann::json occ = nlohmann::json::array();
    for (const auto& o : f.occurrences) occ.push_back({{"path", o.path}, {"split", split_name(o.split)}});
    findings.push_back({{"hash", f.hash}, {"occurrences", occ}});
  }
  return {{"clean", report.clean()}, {"findings", findings}};
}

Manifest make_manifest(const SplitAssignment& assignment, const LabeledCorpus& corpus,
                       ImageSize size) {
  Manifest m;
  m.seed = assignment.seed;
  m.ratios = assignment.ratios;
  m.class_names = corpus.class_names;
  m.image_size = {size.height, size.width};
  if (!corpus.root.empty()) m.root = fs::absolute(corpus.root).lexically_normal().generic_string();
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    const auto& e = corpus.entries[i];
    m.entries.push_back({e.path, e.class_name, e.hash, assignment.assignment[i], {}, {}});
  }
  return m;
}

DatasetBundle materialize_bundle(const SplitAssignment& assignment, const LabeledCorpus& corpus,
                                 ImageSize size, const fs::path& out_dir, int threads) {
  if (size.height == 0 || size.width == 0) fail(ErrorCode::kBadInput, "target size must be positive");
  const auto leaks = leak_check(assignment, corpus);
  if (!leaks.clean()) {
    fail(ErrorCode::kBadInput, std::to_string(leaks.findings.size()) +
                                   " content hash(es) shared across splits; refusing to materialize");
  }
  const std::size_t pixels = size.height * size.width * Image::kChannels;
  std::array<Tensor, 3> xs, ys;
  for (std::size_t s = 0; s < 3; ++s) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
      if (assignment.assignment[i] == kAllSplits[s]) rows.push_back(i);
    }
    Tensor x(DType::kUInt8, {rows.size(), size.height, size.width, Image::kChannels});
    Tensor y(DType::kInt64, {rows.size()});
    auto xv = x.values<std::uint8_t>();
    auto yv = y.values<std::int64_t>();
    parallel_for(rows.size(), threads, [&](std::size_t r) {
      const auto& entry = corpus.entries[rows[r]];
      const auto img = resize_bilinear(read_image(corpus.root / entry.path), size.height, size.width);
      std::copy(img.pixels.begin(), img.pixels.end(), xv.begin() + static_cast<std::ptrdiff_t>(r * pixels));
      yv[r] = corpus.class_index(entry.class_name);
    });
    xs[s] = std::move(x);
    ys[s] = std::move(y);
  }
  save_bundle(out_dir, make_manifest(assignment, corpus, size), xs[0], ys[0], xs[1], ys[1], xs[2], ys[2]);
  return load_bundle(out_dir / "manifest.json");
}

std::pair<LabeledCorpus, SplitAssignment> corpus_from_manifest(const Manifest& manifest,
                                                               const fs::path& root) {
  LabeledCorpus corpus;
  corpus.root = root;
  corpus.class_names = manifest.class_names;
  std::sort(corpus.class_names.begin(), corpus.class_names.end());
  SplitAssignment assignment;
  assignment.seed = manifest.seed;
  assignment.ratios = manifest.ratios;
  std::vector<std::pair<CorpusEntry, Split>> rows;
  for (const auto& e : manifest.entries) rows.push_back({{e.path, e.class_name, e.hash}, e.split});
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first.path < b.first.path; });
  for (auto& [entry, split] : rows) {
    const auto actual = sha256_file(root / entry.path);
    if (actual != entry.hash) {
      fail(ErrorCode::kBundleInvalid, entry.path + " changed since the manifest was written");
    }
    corpus.entries.push_back(std::move(entry));
    assignment.assignment.push_back(split);
  }
  return {std::move(corpus), std::move(assignment)};
}

}  // namespace histostack
