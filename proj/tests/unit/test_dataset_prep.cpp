#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <fstream>
#include <map>

#include "doctest.h"
#include "histostack/dataset_prep.hpp"
#include "histostack/hashing.hpp"
#include "histostack/image.hpp"
#include "histostack/rng.hpp"
#include "test_support.hpp"

using namespace histostack;
using histostack::testing::TempDir;
namespace fs = std::filesystem;

namespace {

Image noise_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  Image img(h, w);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

void make_tree(const fs::path& root, const std::map<std::string, int>& counts, std::size_t h = 6,
               std::size_t w = 8) {
  std::uint64_t seed = 1;
  for (const auto& [cls, n] : counts) {
    fs::create_directories(root / cls);
    for (int i = 0; i < n; ++i) {
      write_png(noise_image(h, w, seed++), root / cls / ("img" + std::to_string(i) + ".png"));
    }
  }
}

LabeledCorpus synthetic_corpus(const std::vector<std::size_t>& sizes) {
  LabeledCorpus c;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    const std::string cls = "c" + std::to_string(k);
    c.class_names.push_back(cls);
    for (std::size_t i = 0; i < sizes[k]; ++i) {
      c.entries.push_back({cls + "/" + std::to_string(i), cls, sha256_hex(cls + std::to_string(i))});
    }
  }
  std::sort(c.entries.begin(), c.entries.end(),
            [](const auto& a, const auto& b) { return a.path < b.path; });
  return c;
}

std::map<std::pair<std::string, Split>, std::size_t> tally(const LabeledCorpus& c,
                                                           const SplitAssignment& a) {
  std::map<std::pair<std::string, Split>, std::size_t> counts;
  for (std::size_t i = 0; i < c.entries.size(); ++i) ++counts[{c.entries[i].class_name, a.assignment[i]}];
  return counts;
}

}  // namespace

TEST_CASE("scan enumerates every image with its class and hash") {
  TempDir dir;
  make_tree(dir.path(), {{"benign", 2}, {"malignant", 3}});
  const auto corpus = scan_corpus(dir.path());
  CHECK(corpus.entries.size() == 5);
  CHECK(corpus.class_names == std::vector<std::string>{"benign", "malignant"});
  CHECK(corpus.entries.front().path == "benign/img0.png");
  CHECK(corpus.entries.front().hash == sha256_file(dir / "benign/img0.png"));
  CHECK(std::is_sorted(corpus.entries.begin(), corpus.entries.end(),
                       [](const auto& a, const auto& b) { return a.path < b.path; }));
}

TEST_CASE("scan results do not depend on thread count") {
  TempDir dir;
  make_tree(dir.path(), {{"a", 5}, {"b", 4}});
  const auto one = scan_corpus(dir.path(), 1);
  const auto four = scan_corpus(dir.path(), 4);
  REQUIRE(one.entries.size() == four.entries.size());
  for (std::size_t i = 0; i < one.entries.size(); ++i) CHECK(one.entries[i].hash == four.entries[i].hash);
}

TEST_CASE("scan rejects empty classes and undecodable files") {
  TempDir dir;
  make_tree(dir.path(), {{"benign", 2}});
  SUBCASE("empty class directory") {
    fs::create_directories(dir / "normal");
    try {
      scan_corpus(dir.path());
      FAIL("expected EmptyClass");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEmptyClass);
      CHECK(std::string(e.what()).find("normal") != std::string::npos);
    }
  }
  SUBCASE("garbage bytes with an image extension") {
    std::ofstream(dir / "benign" / "broken.png") << "not a png";
    CHECK_ERROR_CODE(scan_corpus(dir.path()), ErrorCode::kDecodeError);
  }
}

TEST_CASE("duplicated bytes under two names share a hash") {
  TempDir dir;
  make_tree(dir.path(), {{"benign", 2}});
  fs::copy_file(dir / "benign/img0.png", dir / "benign/copy.png");
  const auto corpus = scan_corpus(dir.path());
  REQUIRE(corpus.entries.size() == 3);
  std::map<std::string, int> by_hash;
  for (const auto& e : corpus.entries) ++by_hash[e.hash];
  CHECK(by_hash.size() == 2);
}

TEST_CASE("100 images per class split 60:20:20 exactly") {
  const auto corpus = synthetic_corpus({100, 100, 100, 100});
  const auto a = stratified_split(corpus, {0.6, 0.2, 0.2}, 11);
  for (const auto& cls : corpus.class_names) {
    const auto counts = tally(corpus, a);
    CHECK(counts.at({cls, Split::kTrain}) == 60);
    CHECK(counts.at({cls, Split::kVal}) == 20);
    CHECK(counts.at({cls, Split::kTest}) == 20);
  }
}

TEST_CASE("split argument validation") {
  const auto corpus = synthetic_corpus({10, 10});
  CHECK_ERROR_CODE(stratified_split(corpus, {1.0, 0.0, 0.0}, 1), ErrorCode::kBadRatios);
  CHECK_ERROR_CODE(stratified_split(corpus, {0.5, 0.2, 0.2}, 1), ErrorCode::kBadRatios);
  CHECK_ERROR_CODE(stratified_split(synthetic_corpus({10, 2}), {0.6, 0.2, 0.2}, 1),
                   ErrorCode::kClassTooSmall);
}

TEST_CASE("split is a pure function of the seed") {
  const auto corpus = synthetic_corpus({17, 23, 9});
  const auto a = stratified_split(corpus, {0.6, 0.2, 0.2}, 5);
  const auto b = stratified_split(corpus, {0.6, 0.2, 0.2}, 5);
  const auto c = stratified_split(corpus, {0.6, 0.2, 0.2}, 6);
  CHECK(a.assignment == b.assignment);
  CHECK(a.assignment != c.assignment);
}

TEST_CASE("stratification stays within one item per class over random corpora") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> sizes(rng.below(5) + 1);
    for (auto& s : sizes) s = 3 + rng.below(150);
    const auto corpus = synthetic_corpus(sizes);
    double r[3] = {rng.uniform(0.1, 1), rng.uniform(0.1, 1), rng.uniform(0.1, 1)};
    const double sum = r[0] + r[1] + r[2];
    const SplitRatios ratios{r[0] / sum, r[1] / sum, 1.0 - r[0] / sum - r[1] / sum};
    const auto a = stratified_split(corpus, ratios, rng.next_u64());
    REQUIRE(a.assignment.size() == corpus.entries.size());
    const auto counts = tally(corpus, a);
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      std::size_t total = 0;
      for (std::size_t s = 0; s < 3; ++s) {
        const auto it = counts.find({corpus.class_names[k], kAllSplits[s]});
        const double got = it == counts.end() ? 0.0 : static_cast<double>(it->second);
        CHECK(std::abs(got - ratios[s] * static_cast<double>(sizes[k])) <= 1.0);
        total += static_cast<std::size_t>(got);
      }
      CHECK(total == sizes[k]);
    }
  }
}

TEST_CASE("leak check") {
  const auto corpus = synthetic_corpus({10, 10});
  auto a = stratified_split(corpus, {0.6, 0.2, 0.2}, 3);
  CHECK(leak_check(a, corpus).clean());

  auto planted = corpus;
  std::size_t train_idx = 0, test_idx = 0;
  for (std::size_t i = 0; i < planted.entries.size(); ++i) {
    if (a.assignment[i] == Split::kTrain) train_idx = i;
    if (a.assignment[i] == Split::kTest) test_idx = i;
  }
  planted.entries[test_idx].hash = planted.entries[train_idx].hash;
  const auto report = leak_check(a, planted);
  REQUIRE(report.findings.size() == 1);
  CHECK(report.findings[0].occurrences.size() == 2);

  const auto manifest = make_manifest(a, planted, {4, 4});
  CHECK(leak_check(manifest).findings.size() == 1);
}

TEST_CASE("materialize stacks resized images and writes a manifest") {
  TempDir src, out;
  make_tree(src.path(), {{"benign", 5}, {"malignant", 5}}, 46, 70);
  const auto corpus = scan_corpus(src.path());
  const auto a = stratified_split(corpus, {0.6, 0.2, 0.2}, 9);
  const auto bundle = materialize_bundle(a, corpus, {23, 35}, out.path());
  CHECK(bundle.x_train.shape() == Tensor::Shape{6, 23, 35, 3});
  CHECK(bundle.x_val.shape() == Tensor::Shape{2, 23, 35, 3});
  CHECK(bundle.y_test.shape() == Tensor::Shape{2});
  CHECK(bundle.manifest.entries.size() == 10);
  CHECK(bundle.class_names == std::vector<std::string>{"benign", "malignant"});

  TempDir again;
  const auto second = materialize_bundle(a, corpus, {23, 35}, again.path());
  CHECK(sha256_file(out / "x_train.npy") == sha256_file(again / "x_train.npy"));
  CHECK(second.manifest_hash == bundle.manifest_hash);
}

TEST_CASE("identity resize leaves pixels unchanged") {
  TempDir src, out;
  make_tree(src.path(), {{"a", 3}, {"b", 3}}, 5, 7);
  const auto corpus = scan_corpus(src.path());
  const auto a = stratified_split(corpus, {0.6, 0.2, 0.2}, 1);
  const auto bundle = materialize_bundle(a, corpus, {5, 7}, out.path());
  std::size_t row = 0;
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    if (a.assignment[i] != Split::kTrain) continue;
    const auto img = read_image(src / corpus.entries[i].path);
    const auto xs = bundle.x_train.values<std::uint8_t>();
    CHECK(std::equal(img.pixels.begin(), img.pixels.end(), xs.begin() + static_cast<long>(row * 105)));
    ++row;
  }
}

TEST_CASE("bilinear resize of a constant image stays constant") {
  Image img(460, 700);
  std::fill(img.pixels.begin(), img.pixels.end(), 77);
  const auto small = resize_bilinear(img, 230, 350);
  CHECK(small.height == 230);
  CHECK(std::all_of(small.pixels.begin(), small.pixels.end(), [](auto p) { return p == 77; }));
}

TEST_CASE("48-bit TIFF is rejected") {
  TempDir dir;
  fs::create_directories(dir / "Benign");
  cv::Mat deep(8, 8, CV_16UC3, cv::Scalar(1000, 2000, 3000));
  REQUIRE(cv::imwrite((dir / "Benign" / "deep.tif").string(), deep));
  CHECK_ERROR_CODE(scan_corpus(dir.path()), ErrorCode::kDecodeError);
  CHECK_ERROR_CODE(read_image(dir / "Benign" / "deep.tif"), ErrorCode::kDecodeError);
}

TEST_CASE("a manifest reproduces its corpus and assignment") {
  TempDir src, out;
  make_tree(src.path(), {{"a", 4}, {"b", 4}});
  const auto corpus = scan_corpus(src.path());
  const auto a = stratified_split(corpus, {0.5, 0.25, 0.25}, 4);
  const auto m = make_manifest(a, corpus, {6, 8});
  const auto [c2, a2] = corpus_from_manifest(m, src.path());
  CHECK(a2.assignment == a.assignment);
  CHECK(c2.entries.size() == corpus.entries.size());
  write_png(noise_image(6, 8, 999), src / "a/img0.png");
  CHECK_ERROR_CODE(corpus_from_manifest(m, src.path()), ErrorCode::kBundleInvalid);
}
