#include "histostack/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "histostack/hashing.hpp"
#include "histostack/parallel.hpp"
#include "histostack/rng.hpp"

namespace histostack {

std::string_view fill_mode_name(FillMode mode) {
  switch (mode) {
    case FillMode::kNearest: return "nearest";
    case FillMode::kReflect: return "reflect";
    case FillMode::kWrap: return "wrap";
    case FillMode::kConstant: return "constant";
  }
  return "reflect";
}

FillMode parse_fill_mode(std::string_view name) {
  if (name == "nearest") return FillMode::kNearest;
  if (name == "reflect") return FillMode::kReflect;
  if (name == "wrap") return FillMode::kWrap;
  if (name == "constant") return FillMode::kConstant;
  fail(ErrorCode::kBadConfig, "unknown fill_mode '" + std::string(name) + "'");
}

AugmentConfig AugmentConfig::identity() {
  AugmentConfig cfg;
  cfg.rotation_range = 0;
  cfg.width_shift_range = 0;
  cfg.height_shift_range = 0;
  cfg.shear_range = 0;
  cfg.zoom_range = {1, 1};
  cfg.horizontal_flip = false;
  cfg.vertical_flip = false;
  cfg.brightness_range = {1, 1};
  return cfg;
}

void AugmentConfig::validate() const {
  for (double r : {rotation_range, width_shift_range, height_shift_range, shear_range}) {
    if (!std::isfinite(r) || r < 0) fail(ErrorCode::kBadConfig, "augmentation ranges must be non-negative");
  }
  for (const auto& [lo, hi] : {zoom_range, brightness_range}) {
    if (!(lo > 0) || !(lo <= hi) || !std::isfinite(hi)) {
      fail(ErrorCode::kBadConfig, "zoom/brightness intervals need 0 < lo <= hi");
    }
  }
}

nlohmann::json augment_config_to_json(const AugmentConfig& c) {
  return {{"rotation_range", c.rotation_range},
          {"width_shift_range", c.width_shift_range},
          {"height_shift_range", c.height_shift_range},
          {"shear_range", c.shear_range},
          {"zoom_range", {c.zoom_range.first, c.zoom_range.second}},
          {"horizontal_flip", c.horizontal_flip},
          {"vertical_flip", c.vertical_flip},
          {"brightness_range", {c.brightness_range.first, c.brightness_range.second}},
          {"fill_mode", fill_mode_name(c.fill_mode)},
          {"fill_value", c.fill_value},
          {"seed", c.seed}};
}

AugmentConfig augment_config_from_json(const nlohmann::json& doc) {
  AugmentConfig c;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "rotation_range") c.rotation_range = value.get<double>();
      else if (key == "width_shift_range") c.width_shift_range = value.get<double>();
      else if (key == "height_shift_range") c.height_shift_range = value.get<double>();
      else if (key == "shear_range") c.shear_range = value.get<double>();
      else if (key == "zoom_range") c.zoom_range = {value.at(0).get<double>(), value.at(1).get<double>()};
      else if (key == "horizontal_flip") c.horizontal_flip = value.get<bool>();
      else if (key == "vertical_flip") c.vertical_flip = value.get<bool>();
      else if (key == "brightness_range") c.brightness_range = {value.at(0).get<double>(), value.at(1).get<double>()};
      else if (key == "fill_mode") c.fill_mode = parse_fill_mode(value.get<std::string>());
      else if (key == "fill_value") c.fill_value = value.get<std::uint8_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else fail(ErrorCode::kBadConfig, "unknown augmentation key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kBadConfig, std::string("augmentation config: ") + e.what());
  }
  c.validate();
  return c;
}

SampledTransform sample_transform(const AugmentConfig& cfg, std::uint64_t stream_index,
                                  std::size_t height, std::size_t width) {
  Rng rng(mix_seed(cfg.seed, stream_index));
  auto symmetric = [&](double r) { return rng.uniform(-r, r); };
  SampledTransform t;
  t.rotation = symmetric(cfg.rotation_range);
  t.tx = symmetric(cfg.width_shift_range) * static_cast<double>(width);
  t.ty = symmetric(cfg.height_shift_range) * static_cast<double>(height);
  t.shear = symmetric(cfg.shear_range);
  t.zoom_x = rng.uniform(cfg.zoom_range.first, cfg.zoom_range.second);
  t.zoom_y = rng.uniform(cfg.zoom_range.first, cfg.zoom_range.second);
  const bool coin_h = rng.bernoulli(0.5);
  const bool coin_v = rng.bernoulli(0.5);
  t.flip_h = cfg.horizontal_flip && coin_h;
  t.flip_v = cfg.vertical_flip && coin_v;
  t.brightness = rng.uniform(cfg.brightness_range.first, cfg.brightness_range.second);
  return t;
}

namespace {

// Maps an integer tap coordinate into [0, n) or returns -1 for constant fill.
std::ptrdiff_t resolve(std::ptrdiff_t i, std::ptrdiff_t n, FillMode mode) {
  if (i >= 0 && i < n) return i;
  switch (mode) {
    case FillMode::kNearest: return std::clamp<std::ptrdiff_t>(i, 0, n - 1);
    case FillMode::kReflect: {
      const std::ptrdiff_t period = 2 * n;
      std::ptrdiff_t m = ((i % period) + period) % period;
      return m >= n ? period - 1 - m : m;
    }
    case FillMode::kWrap: return ((i % n) + n) % n;
    case FillMode::kConstant: return -1;
  }
  return -1;
}

double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-9 ? r : v;
}

}  // namespace

Image apply_transform(const Image& img, const SampledTransform& t, Fill fill) {
  const std::size_t h = img.height, w = img.width;
  Image out(h, w);
  if (h == 0 || w == 0) return out;

  const double deg = std::numbers::pi / 180.0;
  const double cr = std::cos(t.rotation * deg), sr = std::sin(t.rotation * deg);
  const double cs = std::cos(t.shear * deg), ss = std::sin(t.shear * deg);
  // R * Shear * Zoom, row-major 2x2.
  const double a00 = (cr * 1 + -sr * 0) * t.zoom_x;
  const double a01 = (cr * -ss + -sr * cs) * t.zoom_y;
  const double a10 = (sr * 1 + cr * 0) * t.zoom_x;
  const double a11 = (sr * -ss + cr * cs) * t.zoom_y;
  const double cx = (static_cast<double>(w) - 1) / 2, cy = (static_cast<double>(h) - 1) / 2;

  const auto W = static_cast<std::ptrdiff_t>(w), H = static_cast<std::ptrdiff_t>(h);
  std::vector<double> warped(h * w * Image::kChannels);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double dx = static_cast<double>(x) - cx + t.tx;
      const double dy = static_cast<double>(y) - cy + t.ty;
      const double sx = snap(cx + a00 * dx + a01 * dy);
      const double sy = snap(cy + a10 * dx + a11 * dy);
      const double fx = std::floor(sx), fy = std::floor(sy);
      const double wx = sx - fx, wy = sy - fy;
      const auto x0 = static_cast<std::ptrdiff_t>(fx), y0 = static_cast<std::ptrdiff_t>(fy);
      const std::ptrdiff_t xs[2] = {resolve(x0, W, fill.mode), resolve(x0 + 1, W, fill.mode)};
      const std::ptrdiff_t ys[2] = {resolve(y0, H, fill.mode), resolve(y0 + 1, H, fill.mode)};
      const double wxs[2] = {1 - wx, wx}, wys[2] = {1 - wy, wy};
      for (std::size_t c = 0; c < Image::kChannels; ++c) {
        double v = 0;
        for (int j = 0; j < 2; ++j) {
          for (int i = 0; i < 2; ++i) {
            const double weight = wxs[i] * wys[j];
            if (weight == 0) continue;
            const double tap = (xs[i] < 0 || ys[j] < 0)
                                   ? fill.value
                                   : img.at(static_cast<std::size_t>(ys[j]), static_cast<std::size_t>(xs[i]), c);
            v += weight * tap;
          }
        }
        warped[(y * w + x) * Image::kChannels + c] = v;
      }
    }
  }

  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t src_y = t.flip_v ? h - 1 - y : y;
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t src_x = t.flip_h ? w - 1 - x : x;
      for (std::size_t c = 0; c < Image::kChannels; ++c) {
        const double v = warped[(src_y * w + src_x) * Image::kChannels + c] * t.brightness;
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return out;
}

Image image_from_tensor(const Tensor& images, std::size_t index) {
  if (images.rank() != 4 || images.extent(3) != Image::kChannels) {
    fail(ErrorCode::kShapeError, "expected a [n, h, w, 3] uint8 tensor");
  }
  Image img(images.extent(1), images.extent(2));
  const auto px = images.values<std::uint8_t>();
  const std::size_t stride = img.pixels.size();
  std::copy_n(px.begin() + static_cast<std::ptrdiff_t>(index * stride), stride, img.pixels.begin());
  return img;
}

std::pair<Tensor, Tensor> expand_training_set(const Tensor& x_train, const Tensor& y_train,
                                              const AugmentConfig& cfg, std::size_t k,
                                              int threads) {
  cfg.validate();
  if (x_train.rank() != 4 || x_train.extent(3) != Image::kChannels || x_train.dtype() != DType::kUInt8) {
    fail(ErrorCode::kShapeError, "x_train must be a [n, h, w, 3] uint8 tensor");
  }
  const std::size_t n = x_train.extent(0);
  if (y_train.rank() != 1 || y_train.extent(0) != n) fail(ErrorCode::kShapeError, "y_train does not match x_train");
  const std::size_t h = x_train.extent(1), w = x_train.extent(2);
  const std::size_t stride = h * w * Image::kChannels;
  const std::size_t total = n * (k + 1);

  Tensor x_aug(DType::kUInt8, {total, h, w, Image::kChannels});
  Tensor y_aug(DType::kInt64, {total});
  auto out = x_aug.values<std::uint8_t>();
  auto labels = y_aug.values<std::int64_t>();
  const auto in_labels = y_train.values<std::int64_t>();
  const Fill fill{cfg.fill_mode, cfg.fill_value};

  parallel_for(n, threads, [&](std::size_t i) {
    const Image original = image_from_tensor(x_train, i);
    for (std::size_t j = 0; j <= k; ++j) {
      const std::size_t row = i * (k + 1) + j;
      labels[row] = in_labels[i];
      const Image img =
          j == 0 ? original : apply_transform(original, sample_transform(cfg, i * k + (j - 1), h, w), fill);
      std::copy(img.pixels.begin(), img.pixels.end(), out.begin() + static_cast<std::ptrdiff_t>(row * stride));
    }
  });
  return {std::move(x_aug), std::move(y_aug)};
}

DatasetBundle augment_bundle(const DatasetBundle& bundle, const AugmentConfig& cfg, std::size_t k,
                             const std::filesystem::path& out_dir, int threads) {
  validate_bundle(bundle);
  auto [x_aug, y_aug] = expand_training_set(bundle.x_train, bundle.y_train, cfg, k, threads);

  Manifest m = bundle.manifest;
  std::vector<ManifestEntry> train;
  for (const auto& e : bundle.manifest.entries) {
    if (e.split == Split::kTrain) train.push_back(e);
  }
  if (train.size() != bundle.x_train.extent(0)) {
    fail(ErrorCode::kBundleInvalid, "manifest lists " + std::to_string(train.size()) + " training entries for " +
                                        std::to_string(bundle.x_train.extent(0)) + " training images");
  }
  const std::size_t stride = x_aug.size() / std::max<std::size_t>(x_aug.extent(0), 1);
  const auto px = x_aug.values<std::uint8_t>();
  std::vector<ManifestEntry> entries;
  entries.reserve(bundle.manifest.entries.size() + train.size() * k);
  for (std::size_t i = 0; i < train.size(); ++i) {
    ManifestEntry original = train[i];
    original.source_index = static_cast<std::int64_t>(i);
    original.variant = 0;
    entries.push_back(original);
    for (std::size_t j = 1; j <= k; ++j) {
      const std::size_t row = i * (k + 1) + j;
      ManifestEntry d = original;
      d.path = train[i].path + "#aug" + std::to_string(j);
      d.hash = sha256_hex(px.subspan(row * stride, stride));
      d.variant = static_cast<std::int64_t>(j);
      entries.push_back(std::move(d));
    }
  }
  for (const auto& e : bundle.manifest.entries) {
    if (e.split != Split::kTrain) entries.push_back(e);
  }
  m.entries = std::move(entries);
  m.augmentation = {{"config", augment_config_to_json(cfg)},
                    {"k", k},
                    {"parent_manifest_hash", bundle.manifest_hash},
                    {"split", "train"}};
  m.tensors.clear();
  save_bundle(out_dir, m, x_aug, y_aug, bundle.x_val, bundle.y_val, bundle.x_test, bundle.y_test);
  return load_bundle(out_dir / "manifest.json");
}

}  // namespace histostack
