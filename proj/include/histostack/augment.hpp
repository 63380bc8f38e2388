#pragma once

#include <cstdint>
#include <utility>

#include <nlohmann/json.hpp>

#include "histostack/image.hpp"
#include "histostack/tensor_store.hpp"

namespace histostack {

enum class FillMode { kNearest, kReflect, kWrap, kConstant };

std::string_view fill_mode_name(FillMode mode);
FillMode parse_fill_mode(std::string_view name);

// Generator-style augmentation parameters. Ranges are symmetric (+/-) except
// zoom and brightness, which are [lo, hi] multiplier intervals.
//
// 'nearest' fill smears edge pixels into the exposed border, which on tissue
// images produces structures that look like nuclei; 'reflect' is the default.
struct AugmentConfig {
  double rotation_range = 20.0;  // degrees
  double width_shift_range = 0.05;
  double height_shift_range = 0.05;
  double shear_range = 5.0;  // degrees
  std::pair<double, double> zoom_range{0.95, 1.05};
  bool horizontal_flip = true;
  bool vertical_flip = true;
  std::pair<double, double> brightness_range{0.9, 1.1};
  FillMode fill_mode = FillMode::kReflect;
  std::uint8_t fill_value = 0;
  std::uint64_t seed = 0;

  // All ranges zero, flips off: every sampled transform is the identity.
  static AugmentConfig identity();

  void validate() const;
};

nlohmann::json augment_config_to_json(const AugmentConfig& cfg);
AugmentConfig augment_config_from_json(const nlohmann::json& doc);

struct SampledTransform {
  double rotation = 0;  // degrees
  double tx = 0;        // pixels, along columns
  double ty = 0;        // pixels, along rows
  double shear = 0;     // degrees
  double zoom_x = 1;
  double zoom_y = 1;
  bool flip_h = false;
  bool flip_v = false;
  double brightness = 1;
};

// Draw order is fixed: rotation, tx, ty, shear, zoom_x, zoom_y, flip_h,
// flip_v, brightness. Flip coins are always drawn so enabling a flip never
// shifts the other parameters of the same stream.
SampledTransform sample_transform(const AugmentConfig& cfg, std::uint64_t stream_index,
                                  std::size_t height, std::size_t width);

struct Fill {
  FillMode mode = FillMode::kReflect;
  std::uint8_t value = 0;
};

// Output pixel p (x, y) samples the input at
//   c + R(rotation) * Shear(shear) * Zoom(zoom_x, zoom_y) * (p - c + (tx, ty))
// with c the image centre, using bilinear taps resolved through the fill mode.
// Flips are applied to the warped result, then brightness, then one rounding
// to uint8 with clamping.
Image apply_transform(const Image& img, const SampledTransform& t, Fill fill);

// For every image i: the original, then k variants drawn from streams
// i * k + j (j = 0..k-1). Labels are replicated to match.
std::pair<Tensor, Tensor> expand_training_set(const Tensor& x_train, const Tensor& y_train,
                                              const AugmentConfig& cfg, std::size_t k,
                                              int threads = 1);

Image image_from_tensor(const Tensor& images, std::size_t index);

// Static augmentation of a serialized dataset: the training split becomes
// expand_training_set of the input's, validation and test are copied. Each
// training entry is followed by its k derivatives ("<path>#aug<j>", hashed
// over their pixels); the manifest records the config, k and the parent
// manifest hash under "augmentation".
DatasetBundle augment_bundle(const DatasetBundle& bundle, const AugmentConfig& cfg, std::size_t k,
                             const std::filesystem::path& out_dir, int threads = 1);

}  // namespace histostack
