#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace histostack {

// Axis-aligned binary tree. Internal nodes send x[feature] <= threshold to
// the left child. Leaves carry `value`: a class index for forest trees and a
// raw score for boosting trees.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  std::size_t leaf_index(std::span<const float> row) const {
    std::size_t at = 0;
    while (!nodes[at].is_leaf()) {
      const auto& node = nodes[at];
      at = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                                   : node.right);
    }
    return at;
  }
  double evaluate(std::span<const float> row) const { return nodes[leaf_index(row)].value; }

  std::size_t leaf_count() const {
    std::size_t n = 0;
    for (const auto& node : nodes) n += node.is_leaf();
    return n;
  }
  std::size_t depth() const;
  bool operator==(const Tree&) const = default;
};

inline std::size_t Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

}  // namespace histostack
