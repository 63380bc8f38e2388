#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "histostack/feature_matrix.hpp"

namespace histostack::detail {

// The samples of one tree node, listed once per feature in ascending order of
// that feature (ties by sample index). Splitting a node partitions every list
// stably, so children stay sorted without re-sorting.
struct SortedSamples {
  std::vector<std::vector<std::uint32_t>> by_feature;

  std::size_t size() const { return by_feature.empty() ? 0 : by_feature[0].size(); }
  std::span<const std::uint32_t> any_order() const { return by_feature[0]; }
};

inline SortedSamples presort(const FeatureMatrix& x, std::span<const std::size_t> samples) {
  SortedSamples out;
  out.by_feature.resize(x.cols());
  std::vector<std::uint32_t> base(samples.begin(), samples.end());
  for (std::size_t f = 0; f < x.cols(); ++f) {
    auto& list = out.by_feature[f];
    list = base;
    std::stable_sort(list.begin(), list.end(), [&](std::uint32_t a, std::uint32_t b) {
      const float va = x(a, f), vb = x(b, f);
      return va < vb || (va == vb && a < b);
    });
  }
  return out;
}

inline std::pair<SortedSamples, SortedSamples> partition(const SortedSamples& node, const FeatureMatrix& x,
                                                         std::size_t feature, double threshold) {
  std::pair<SortedSamples, SortedSamples> out;
  out.first.by_feature.resize(node.by_feature.size());
  out.second.by_feature.resize(node.by_feature.size());
  for (std::size_t f = 0; f < node.by_feature.size(); ++f) {
    for (auto i : node.by_feature[f]) {
      (x(i, feature) <= threshold ? out.first : out.second).by_feature[f].push_back(i);
    }
  }
  return out;
}

// Midpoint strictly between two distinct float values.
inline double midpoint(float lo, float hi) { return (static_cast<double>(lo) + static_cast<double>(hi)) / 2; }

}  // namespace histostack::detail
