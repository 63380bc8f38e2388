#include <complex>
#include <cmath>
#include <map>

#include "doctest.h"
#include "histostack/augment.hpp"
#include "histostack/dataset_prep.hpp"
#include "histostack/rng.hpp"
#include "test_support.hpp"

using namespace histostack;
using histostack::testing::TempDir;

namespace {

Image noise(std::size_t h, std::size_t w, std::uint64_t seed) {
  Rng rng(seed);
  Image img(h, w);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

Image row_image(std::initializer_list<std::uint8_t> values) {
  Image img(1, values.size());
  std::size_t x = 0;
  for (auto v : values) {
    for (std::size_t c = 0; c < 3; ++c) img.at(0, x, c) = v;
    ++x;
  }
  return img;
}

std::vector<int> row_values(const Image& img) {
  std::vector<int> out;
  for (std::size_t x = 0; x < img.width; ++x) out.push_back(img.at(0, x, 0));
  return out;
}

// Independent rotation oracle: rotate the centred coordinate with std::polar
// and sample bilinearly with edge clamping.
Image rotate_oracle(const Image& img, double degrees) {
  Image out(img.height, img.width);
  const double cx = (img.width - 1) / 2.0, cy = (img.height - 1) / 2.0;
  const std::complex<double> turn = std::polar(1.0, degrees * 3.14159265358979323846 / 180.0);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const auto src = std::complex<double>(x - cx, y - cy) * turn;
      const double sx = std::clamp(src.real() + cx, 0.0, img.width - 1.0);
      const double sy = std::clamp(src.imag() + cy, 0.0, img.height - 1.0);
      const auto x0 = static_cast<std::size_t>(sx), y0 = static_cast<std::size_t>(sy);
      const auto x1 = std::min(x0 + 1, img.width - 1), y1 = std::min(y0 + 1, img.height - 1);
      const double fx = sx - x0, fy = sy - y0;
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = (1 - fy) * ((1 - fx) * img.at(y0, x0, c) + fx * img.at(y0, x1, c)) +
                         fy * ((1 - fx) * img.at(y1, x0, c) + fx * img.at(y1, x1, c));
        out.at(y, x, c) = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }
  return out;
}

int max_abs_diff(const Image& a, const Image& b) {
  int m = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) m = std::max(m, std::abs(a.pixels[i] - b.pixels[i]));
  return m;
}

Tensor image_stack(std::size_t n, std::size_t h, std::size_t w, std::uint64_t seed) {
  Tensor x(DType::kUInt8, {n, h, w, 3});
  Rng rng(seed);
  for (auto& v : x.values<std::uint8_t>()) v = static_cast<std::uint8_t>(rng.below(256));
  return x;
}

}  // namespace

TEST_CASE("zero ranges sample the identity transform") {
  const auto t = sample_transform(AugmentConfig::identity(), 17, 10, 10);
  CHECK(t.rotation == 0);
  CHECK(t.tx == 0);
  CHECK(t.ty == 0);
  CHECK(t.shear == 0);
  CHECK(t.zoom_x == 1);
  CHECK(t.zoom_y == 1);
  CHECK_FALSE(t.flip_h);
  CHECK_FALSE(t.flip_v);
  CHECK(t.brightness == 1);
}

TEST_CASE("sampling is determined by seed and stream index") {
  AugmentConfig cfg;
  cfg.seed = 123;
  const auto a = sample_transform(cfg, 5, 32, 32);
  const auto b = sample_transform(cfg, 5, 32, 32);
  const auto c = sample_transform(cfg, 6, 32, 32);
  CHECK(a.rotation == b.rotation);
  CHECK(a.brightness == b.brightness);
  CHECK(a.rotation != c.rotation);
}

TEST_CASE("rotation samples are uniform on [-range, range]") {
  auto cfg = AugmentConfig::identity();
  cfg.rotation_range = 40;
  cfg.seed = 8;
  const int n = 10000;
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    const double r = sample_transform(cfg, static_cast<std::uint64_t>(i), 8, 8).rotation;
    REQUIRE(r >= -40.0);
    REQUIRE(r <= 40.0);
    sum += r;
  }
  const double sigma_of_mean = 40.0 / std::sqrt(3.0) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sum / n) <= 3 * sigma_of_mean);
}

TEST_CASE("flip coins are Bernoulli(1/2) when enabled") {
  auto cfg = AugmentConfig::identity();
  cfg.horizontal_flip = true;
  int heads = 0;
  for (int i = 0; i < 4000; ++i) heads += sample_transform(cfg, static_cast<std::uint64_t>(i), 4, 4).flip_h;
  CHECK(std::abs(heads - 2000) < 3 * std::sqrt(1000.0));
}

TEST_CASE("identity transform returns the input exactly") {
  const auto img = noise(13, 17, 1);
  CHECK(apply_transform(img, SampledTransform{}, {}) == img);
}

TEST_CASE("horizontal flip of a 2x2 image swaps columns") {
  Image img(2, 2);
  const std::uint8_t a = 1, b = 2, c = 3, d = 4;
  img.at(0, 0, 0) = a; img.at(0, 1, 0) = b; img.at(1, 0, 0) = c; img.at(1, 1, 0) = d;
  SampledTransform t;
  t.flip_h = true;
  const auto out = apply_transform(img, t, {});
  CHECK(out.at(0, 0, 0) == b);
  CHECK(out.at(0, 1, 0) == a);
  CHECK(out.at(1, 0, 0) == d);
  CHECK(out.at(1, 1, 0) == c);
}

TEST_CASE("flips are involutions") {
  const auto img = noise(9, 6, 2);
  for (int mode = 0; mode < 3; ++mode) {
    SampledTransform t;
    t.flip_h = mode != 1;
    t.flip_v = mode != 0;
    CHECK(apply_transform(apply_transform(img, t, {}), t, {}) == img);
  }
}

TEST_CASE("a full-width shift with constant fill yields the fill value") {
  const auto img = noise(7, 11, 3);
  SampledTransform t;
  t.tx = 11;
  const auto zero = apply_transform(img, t, {FillMode::kConstant, 0});
  CHECK(std::all_of(zero.pixels.begin(), zero.pixels.end(), [](auto p) { return p == 0; }));
  const auto grey = apply_transform(img, t, {FillMode::kConstant, 128});
  CHECK(std::all_of(grey.pixels.begin(), grey.pixels.end(), [](auto p) { return p == 128; }));
}

TEST_CASE("fill modes resolve out-of-range taps") {
  const auto img = row_image({10, 20, 30});
  SampledTransform right;
  right.tx = 1;
  SampledTransform left;
  left.tx = -1;
  CHECK(row_values(apply_transform(img, right, {FillMode::kReflect, 0})) == std::vector<int>{20, 30, 30});
  CHECK(row_values(apply_transform(img, right, {FillMode::kWrap, 0})) == std::vector<int>{20, 30, 10});
  CHECK(row_values(apply_transform(img, right, {FillMode::kNearest, 0})) == std::vector<int>{20, 30, 30});
  CHECK(row_values(apply_transform(img, right, {FillMode::kConstant, 9})) == std::vector<int>{20, 30, 9});
  CHECK(row_values(apply_transform(img, left, {FillMode::kReflect, 0})) == std::vector<int>{10, 10, 20});
  CHECK(row_values(apply_transform(img, left, {FillMode::kWrap, 0})) == std::vector<int>{30, 10, 20});
  SampledTransform far;
  far.tx = 4;  // reflect period is 6: source x = 4, 5, 6 -> 1, 0, 0
  CHECK(row_values(apply_transform(img, far, {FillMode::kReflect, 0})) == std::vector<int>{20, 10, 10});
}

TEST_CASE("rotation by 360 degrees matches an independent warp") {
  const auto img = noise(15, 21, 4);
  SampledTransform t;
  t.rotation = 360;
  const auto out = apply_transform(img, t, {FillMode::kNearest, 0});
  CHECK(max_abs_diff(out, rotate_oracle(img, 360)) <= 1);
  CHECK(max_abs_diff(out, img) <= 1);
}

TEST_CASE("quarter turn on a square image is an exact pixel permutation") {
  const auto img = noise(9, 9, 5);
  SampledTransform t;
  t.rotation = 90;
  const auto out = apply_transform(img, t, {FillMode::kConstant, 0});
  for (std::size_t y = 0; y < 9; ++y)
    for (std::size_t x = 0; x < 9; ++x)
      for (std::size_t c = 0; c < 3; ++c) REQUIRE(out.at(y, x, c) == img.at(x, 8 - y, c));
  CHECK(max_abs_diff(out, rotate_oracle(img, 90)) <= 1);
}

TEST_CASE("brightness saturates at 255") {
  auto img = row_image({200, 100, 0});
  SampledTransform t;
  t.brightness = 1.5;
  CHECK(row_values(apply_transform(img, t, {})) == std::vector<int>{255, 150, 0});
}

TEST_CASE("expansion by 10 turns 60 originals into 660 images") {
  const auto x = image_stack(60, 6, 6, 9);
  Tensor y(DType::kInt64, {60});
  const auto [xa, ya] = expand_training_set(x, y, AugmentConfig{}, 10);
  CHECK(xa.extent(0) == 660);
  CHECK(ya.extent(0) == 660);
  // Row i*(k+1) is original i.
  CHECK(image_from_tensor(xa, 11) == image_from_tensor(x, 1));
}

TEST_CASE("expansion with k = 0 is the identity") {
  const auto x = image_stack(5, 4, 3, 10);
  const auto y = Tensor::from<std::int64_t>({5}, {0, 1, 2, 1, 0});
  const auto [xa, ya] = expand_training_set(x, y, AugmentConfig{}, 0);
  CHECK(xa == x);
  CHECK(ya == y);
}

TEST_CASE("expansion replicates labels k+1 times") {
  const auto x = image_stack(7, 4, 4, 11);
  const auto y = Tensor::from<std::int64_t>({7}, {0, 1, 2, 2, 1, 0, 3});
  const auto [xa, ya] = expand_training_set(x, y, AugmentConfig{}, 3);
  std::map<std::int64_t, int> before, after;
  for (auto v : y.values<std::int64_t>()) ++before[v];
  for (auto v : ya.values<std::int64_t>()) ++after[v];
  for (auto& [label, count] : before) CHECK(after[label] == 4 * count);
}

TEST_CASE("identity config copies every original k+1 times") {
  const auto x = image_stack(4, 5, 5, 12);
  const auto y = Tensor::from<std::int64_t>({4}, {0, 1, 0, 1});
  const auto [xa, ya] = expand_training_set(x, y, AugmentConfig::identity(), 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) CHECK(image_from_tensor(xa, i * 4 + j) == image_from_tensor(x, i));
}

TEST_CASE("expansion is deterministic and independent of thread count") {
  const auto x = image_stack(6, 8, 8, 13);
  const auto y = Tensor::from<std::int64_t>({6}, {0, 1, 0, 1, 0, 1});
  AugmentConfig cfg;
  cfg.seed = 77;
  const auto one = expand_training_set(x, y, cfg, 4, 1);
  const auto many = expand_training_set(x, y, cfg, 4, 3);
  CHECK(one.first == many.first);
  CHECK(one.second == many.second);
}

TEST_CASE("augmented derivatives are not flagged as leaks") {
  TempDir dir;
  std::filesystem::create_directories(dir / "a");
  std::filesystem::create_directories(dir / "b");
  for (int i = 0; i < 3; ++i) {
    write_png(noise(8, 8, 100 + i), dir / "a" / ("a" + std::to_string(i) + ".png"));
    write_png(noise(8, 8, 200 + i), dir / "b" / ("b" + std::to_string(i) + ".png"));
  }
  AugmentConfig cfg;
  cfg.seed = 3;
  const auto original = read_image(dir / "a" / "a0.png");
  write_png(apply_transform(original, sample_transform(cfg, 0, 8, 8), {cfg.fill_mode, 0}),
            dir / "a" / "a0_aug.png");
  const auto corpus = scan_corpus(dir.path());
  SplitAssignment a{0, {0.6, 0.2, 0.2}, {}};
  for (const auto& e : corpus.entries) a.assignment.push_back(e.path == "a/a0_aug.png" ? Split::kTest : Split::kTrain);
  CHECK(leak_check(a, corpus).clean());
}

TEST_CASE("config JSON round trip and validation") {
  AugmentConfig cfg;
  cfg.fill_mode = FillMode::kWrap;
  cfg.seed = 5;
  const auto back = augment_config_from_json(augment_config_to_json(cfg));
  CHECK(augment_config_to_json(back) == augment_config_to_json(cfg));
  CHECK_ERROR_CODE(augment_config_from_json({{"rotation_range", -1}}), ErrorCode::kBadConfig);
  CHECK_ERROR_CODE(augment_config_from_json({{"zoom_range", {1.2, 1.1}}}), ErrorCode::kBadConfig);
  CHECK_ERROR_CODE(augment_config_from_json({{"rotate", 10}}), ErrorCode::kBadConfig);
  CHECK_ERROR_CODE(augment_config_from_json({{"fill_mode", "mirror"}}), ErrorCode::kBadConfig);
}

TEST_CASE("augmenting a bundle expands only the training split") {
  TempDir dir;
  for (const char* cls : {"a", "b"}) {
    std::filesystem::create_directories(dir / "corpus" / cls);
    for (int i = 0; i < 5; ++i) {
      write_png(noise(6, 6, std::hash<std::string>{}(cls) + i), dir / "corpus" / cls / (std::to_string(i) + ".png"));
    }
  }
  const auto corpus = scan_corpus(dir / "corpus");
  const auto split = stratified_split(corpus, {0.6, 0.2, 0.2}, 4);
  const auto bundle = materialize_bundle(split, corpus, {6, 6}, dir / "bundle");
  AugmentConfig cfg;
  cfg.seed = 9;
  const auto aug = augment_bundle(bundle, cfg, 2, dir / "aug");
  CHECK(aug.x_train.extent(0) == 3 * bundle.x_train.extent(0));
  CHECK(aug.x_val == bundle.x_val);
  CHECK(aug.y_test == bundle.y_test);
  CHECK(aug.x_train == expand_training_set(bundle.x_train, bundle.y_train, cfg, 2).first);
  CHECK(aug.manifest.augmentation.at("k") == 2);
  CHECK(aug.manifest.augmentation.at("parent_manifest_hash") == bundle.manifest_hash);
  CHECK(aug.manifest.entries.size() == bundle.manifest.entries.size() + 2 * bundle.x_train.extent(0));
  std::size_t derivatives = 0;
  for (const auto& e : aug.manifest.entries) {
    if (e.variant && *e.variant > 0) {
      ++derivatives;
      CHECK(e.split == Split::kTrain);
      CHECK(e.path.find("#aug") != std::string::npos);
    }
  }
  CHECK(derivatives == 2 * bundle.x_train.extent(0));
  CHECK(leak_check(aug.manifest).clean());
}
