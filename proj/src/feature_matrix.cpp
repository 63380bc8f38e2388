#include "histostack/feature_matrix.hpp"

#include <cmath>
#include <set>

namespace histostack {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<float> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) fail(ErrorCode::kShapeError, "feature matrix size mismatch");
}

FeatureMatrix FeatureMatrix::from_tensor(const Tensor& tensor) {
  if (tensor.dtype() != DType::kFloat32 || tensor.rank() == 0) {
    fail(ErrorCode::kShapeError, "feature maps must be float32 tensors of rank >= 1");
  }
  const std::size_t rows = tensor.extent(0);
  std::size_t cols = 1;
  for (std::size_t a = 1; a < tensor.rank(); ++a) cols *= tensor.extent(a);
  const auto v = tensor.values<float>();
  return FeatureMatrix(rows, cols, std::vector<float>(v.begin(), v.end()));
}

Tensor FeatureMatrix::to_tensor() const { return Tensor::from<float>({rows_, cols_}, values_); }

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  FeatureMatrix out(indices.size(), cols_);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

void FeatureMatrix::require_finite() const {
  for (float v : values_) {
    if (!std::isfinite(v)) fail(ErrorCode::kBadInput, "feature matrix contains non-finite values");
  }
}

std::size_t check_labels(std::span<const std::int64_t> y, std::size_t n, std::size_t declared) {
  if (y.size() != n) {
    fail(ErrorCode::kShapeError, std::to_string(y.size()) + " labels for " + std::to_string(n) + " rows");
  }
  std::int64_t max_label = -1;
  for (auto v : y) {
    if (v < 0) fail(ErrorCode::kBadLabel, "negative label " + std::to_string(v));
    max_label = std::max(max_label, v);
  }
  const std::size_t k = declared > 0 ? declared : static_cast<std::size_t>(max_label + 1);
  if (max_label >= static_cast<std::int64_t>(k)) {
    fail(ErrorCode::kBadLabel, "label " + std::to_string(max_label) + " outside [0, " + std::to_string(k) + ")");
  }
  return k;
}

std::size_t distinct_labels(std::span<const std::int64_t> y) {
  return std::set<std::int64_t>(y.begin(), y.end()).size();
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Labels argmax_rows(const ScoreMatrix& scores) {
  Labels out(scores.rows);
  for (std::size_t i = 0; i < scores.rows; ++i) {
    out[i] = static_cast<std::int64_t>(argmax({scores.values.data() + i * scores.cols, scores.cols}));
  }
  return out;
}

void require_width(const FeatureMatrix& x, std::size_t expected) {
  if (x.cols() != expected) {
    fail(ErrorCode::kShapeError, "expected " + std::to_string(expected) + " features, got " +
                                     std::to_string(x.cols()));
  }
}

}  // namespace histostack
