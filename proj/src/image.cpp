#include "histostack/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "histostack/error.hpp"

namespace histostack {

Image decode_image(std::span<const std::uint8_t> bytes, const std::string& origin) {
  cv::Mat decoded;
  try {
    const cv::Mat buf(1, static_cast<int>(bytes.size()), CV_8U, const_cast<std::uint8_t*>(bytes.data()));
    decoded = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception&) {
    decoded.release();
  }
  if (decoded.empty()) fail(ErrorCode::kDecodeError, origin + ": not a decodable image");
  if (decoded.depth() != CV_8U) {
    fail(ErrorCode::kDecodeError,
         origin + ": only 8 bits per channel are supported; convert to 24-bit first");
  }
  const int channels = decoded.channels();
  if (channels != 1 && channels != 3 && channels != 4) {
    fail(ErrorCode::kDecodeError, origin + ": unsupported channel count");
  }
  Image img(static_cast<std::size_t>(decoded.rows), static_cast<std::size_t>(decoded.cols));
  for (int y = 0; y < decoded.rows; ++y) {
    const std::uint8_t* row = decoded.ptr<std::uint8_t>(y);
    for (int x = 0; x < decoded.cols; ++x) {
      const std::uint8_t* px = row + x * channels;
      const auto uy = static_cast<std::size_t>(y), ux = static_cast<std::size_t>(x);
      if (channels == 1) {
        img.at(uy, ux, 0) = img.at(uy, ux, 1) = img.at(uy, ux, 2) = px[0];
      } else {
        // OpenCV order is BGR(A).
        img.at(uy, ux, 0) = px[2];
        img.at(uy, ux, 1) = px[1];
        img.at(uy, ux, 2) = px[0];
      }
    }
  }
  return img;
}

Image read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_image(bytes, path.string());
}

void write_png(const Image& image, const std::filesystem::path& path) {
  cv::Mat mat(static_cast<int>(image.height), static_cast<int>(image.width), CV_8UC3);
  for (std::size_t y = 0; y < image.height; ++y) {
    auto* row = mat.ptr<std::uint8_t>(static_cast<int>(y));
    for (std::size_t x = 0; x < image.width; ++x) {
      row[x * 3 + 0] = image.at(y, x, 2);
      row[x * 3 + 1] = image.at(y, x, 1);
      row[x * 3 + 2] = image.at(y, x, 0);
    }
  }
  if (!cv::imwrite(path.string(), mat)) fail(ErrorCode::kIoError, "cannot write " + path.string());
}

Image resize_bilinear(const Image& src, std::size_t height, std::size_t width) {
  if (height == src.height && width == src.width) return src;
  Image out(height, width);
  if (src.height == 0 || src.width == 0) return out;
  const double sy = static_cast<double>(src.height) / static_cast<double>(height);
  const double sx = static_cast<double>(src.width) / static_cast<double>(width);
  const double max_y = static_cast<double>(src.height - 1);
  const double max_x = static_cast<double>(src.width - 1);
  for (std::size_t y = 0; y < height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, max_x);
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < Image::kChannels; ++c) {
        const double top = src.at(y0, x0, c) * (1 - wx) + src.at(y0, x1, c) * wx;
        const double bottom = src.at(y1, x0, c) * (1 - wx) + src.at(y1, x1, c) * wx;
        const double v = top * (1 - wy) + bottom * wy;
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return out;
}

}  // namespace histostack
