#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "histostack/error.hpp"
#include "histostack/manifest.hpp"

namespace histostack {

enum class DType { kUInt8, kFloat32, kInt64 };

std::string_view dtype_name(DType dtype);
std::size_t dtype_size(DType dtype);

template <typename T> struct dtype_of;
template <> struct dtype_of<std::uint8_t> { static constexpr DType value = DType::kUInt8; };
template <> struct dtype_of<float> { static constexpr DType value = DType::kFloat32; };
template <> struct dtype_of<std::int64_t> { static constexpr DType value = DType::kInt64; };

// Dense row-major n-d array of one of the three supported element types.
class Tensor {
 public:
  using Storage =
      std::variant<std::vector<std::uint8_t>, std::vector<float>, std::vector<std::int64_t>>;
  using Shape = std::vector<std::size_t>;

  Tensor() : Tensor(DType::kFloat32, {0}) {}
  Tensor(DType dtype, Shape shape);
  Tensor(Shape shape, Storage data);

  template <typename T>
  static Tensor from(Shape shape, std::vector<T> data) {
    return Tensor(std::move(shape), Storage(std::move(data)));
  }

  DType dtype() const { return static_cast<DType>(data_.index()); }
  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const;
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t byte_size() const { return size() * dtype_size(dtype()); }

  template <typename T>
  std::span<const T> values() const {
    check_dtype(dtype_of<T>::value);
    return std::get<std::vector<T>>(data_);
  }
  template <typename T>
  std::span<T> values() {
    check_dtype(dtype_of<T>::value);
    return std::get<std::vector<T>>(data_);
  }

  const Storage& storage() const { return data_; }

  // Bitwise: NaN payloads compare equal to themselves.
  bool operator==(const Tensor& other) const;

 private:
  void check_dtype(DType want) const;

  Shape shape_;
  Storage data_;
};

// NPY v1.0 encoding, byte-identical to numpy.save for the supported dtypes.
std::vector<std::uint8_t> encode_npy(const Tensor& tensor);
// Accepts NPY v1.x/v2.x headers; every malformed input maps to an Error.
Tensor decode_npy(std::span<const std::uint8_t> bytes);

void write_tensor(const Tensor& tensor, const std::filesystem::path& path);
Tensor read_tensor(const std::filesystem::path& path);

struct DatasetBundle {
  Tensor x_train, y_train;
  Tensor x_val, y_val;
  Tensor x_test, y_test;
  std::vector<std::string> class_names;
  std::filesystem::path manifest_path;
  std::string manifest_hash;
  Manifest manifest;

  const Tensor& labels(Split split) const;
  const Tensor& images(Split split) const;
};

// Checks leading extents against labels and label range against class_names.
void validate_bundle(const DatasetBundle& bundle);

DatasetBundle load_bundle(const std::filesystem::path& manifest_path);

// Writes the six tensors next to the manifest and the manifest itself;
// manifest.tensors is filled in with the relative file names. Returns the
// manifest hash (SHA-256 of the written manifest bytes).
std::string save_bundle(const std::filesystem::path& out_dir, Manifest manifest,
                        const Tensor& x_train, const Tensor& y_train, const Tensor& x_val,
                        const Tensor& y_val, const Tensor& x_test, const Tensor& y_test);

}  // namespace histostack
