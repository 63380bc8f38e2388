#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "histostack/tensor_store.hpp"

namespace histostack {

// Row-major float32 sample-by-feature matrix.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols) {}
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<float> values);

  // Accepts float32 tensors of rank >= 1; trailing axes are flattened.
  static FeatureMatrix from_tensor(const Tensor& tensor);
  Tensor to_tensor() const;

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const float> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
  std::span<float> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }
  float operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  float& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

  const std::vector<float>& values() const { return values_; }

  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

  // Throws BadInput on NaN or infinity.
  void require_finite() const;

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> values_;
};

// Row-major double matrix for scores and probabilities.
struct ScoreMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  ScoreMatrix() = default;
  ScoreMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

using Labels = std::vector<std::int64_t>;

// Returns the class count: `declared` when positive, else max(y) + 1. Checks
// length against n and range against the class count.
std::size_t check_labels(std::span<const std::int64_t> y, std::size_t n, std::size_t declared);

// Number of distinct labels present in y.
std::size_t distinct_labels(std::span<const std::int64_t> y);

// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

Labels argmax_rows(const ScoreMatrix& scores);

void require_width(const FeatureMatrix& x, std::size_t expected);

}  // namespace histostack
