#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace histostack {

// 8-bit interleaved RGB raster, row-major (h, w, 3).
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> pixels;

  static constexpr std::size_t kChannels = 3;

  Image() = default;
  Image(std::size_t h, std::size_t w) : height(h), width(w), pixels(h * w * kChannels, 0) {}

  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t c) {
    return pixels[(y * width + x) * kChannels + c];
  }
  std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * width + x) * kChannels + c];
  }

  bool operator==(const Image&) const = default;
};

// Decodes PNG/JPEG/BMP/TIFF bytes. Only 8 bits per channel are accepted;
// grey is replicated to three channels and alpha is dropped. Anything else
// (including 16-bit-per-channel TIFF) raises DecodeError.
Image decode_image(std::span<const std::uint8_t> bytes, const std::string& origin);
Image read_image(const std::filesystem::path& path);
void write_png(const Image& image, const std::filesystem::path& path);

// Bilinear resize with half-pixel centres and edge clamping. Resizing to the
// source size returns the input unchanged.
Image resize_bilinear(const Image& image, std::size_t height, std::size_t width);

}  // namespace histostack
