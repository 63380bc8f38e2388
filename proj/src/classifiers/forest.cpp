#include "histostack/classifiers/forest.hpp"

#include <cmath>
#include <numeric>

#include "histostack/parallel.hpp"
#include "histostack/rng.hpp"
#include "presort.hpp"

namespace histostack {
namespace {

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0;
  double score = -1;  // sum over children of sum_c count_c^2 / size
};

std::int64_t majority(const std::vector<std::size_t>& counts) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return static_cast<std::int64_t>(best);
}

// Maximising the children's sum of squared class counts over size is the same
// as maximising the weighted Gini decrease.
void best_split_on(const FeatureMatrix& x, std::span<const std::int64_t> y, std::size_t k,
                   std::span<const std::uint32_t> sorted, std::size_t feature, Split& best) {
  const std::size_t m = sorted.size();
  std::vector<double> left(k, 0.0), right(k, 0.0);
  for (auto i : sorted) right[static_cast<std::size_t>(y[i])] += 1;
  double sq_left = 0, sq_right = 0;
  for (double c : right) sq_right += c * c;
  for (std::size_t pos = 0; pos + 1 < m; ++pos) {
    const auto cls = static_cast<std::size_t>(y[sorted[pos]]);
    sq_left += 2 * left[cls] + 1;
    left[cls] += 1;
    sq_right -= 2 * right[cls] - 1;
    right[cls] -= 1;
    const float a = x(sorted[pos], feature), b = x(sorted[pos + 1], feature);
    if (!(a < b)) continue;
    const double nl = static_cast<double>(pos + 1), nr = static_cast<double>(m - pos - 1);
    const double score = sq_left / nl + sq_right / nr;
    if (score > best.score) {
      best = {true, feature, detail::midpoint(a, b), score};
    }
  }
}

Tree grow_tree(const FeatureMatrix& x, std::span<const std::int64_t> y, std::size_t k, const ForestModel& spec,
               std::span<const std::size_t> samples, Rng& rng) {
  const std::size_t p = x.cols();
  Tree tree;
  struct Pending {
    std::size_t node;
    detail::SortedSamples samples;
    std::size_t depth;
  };
  std::vector<Pending> stack;
  tree.nodes.emplace_back();
  stack.push_back({0, detail::presort(x, samples), 0});
  std::vector<std::size_t> perm(p);

  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    std::vector<std::size_t> counts(k, 0);
    std::size_t present = 0;
    for (auto i : job.samples.any_order()) present += counts[static_cast<std::size_t>(y[i])]++ == 0;
    tree.nodes[job.node].value = static_cast<double>(majority(counts));
    const bool depth_capped = spec.max_depth && job.depth >= *spec.max_depth;
    if (present <= 1 || depth_capped) continue;

    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm.begin(), perm.end());
    std::vector<std::size_t> drawn(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(spec.max_features));
    std::vector<std::size_t> rest(perm.begin() + static_cast<std::ptrdiff_t>(spec.max_features), perm.end());
    std::sort(drawn.begin(), drawn.end());
    std::sort(rest.begin(), rest.end());
    Split best;
    for (auto f : drawn) best_split_on(x, y, k, job.samples.by_feature[f], f, best);
    // Constant features in the draw: widen the search to the remaining ones.
    if (!best.found) {
      for (auto f : rest) best_split_on(x, y, k, job.samples.by_feature[f], f, best);
    }
    if (!best.found) continue;

    auto [left, right] = detail::partition(job.samples, x, best.feature, best.threshold);
    const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& node = tree.nodes[job.node];
    node.feature = static_cast<std::int32_t>(best.feature);
    node.threshold = best.threshold;
    node.left = left_id;
    node.right = left_id + 1;
    stack.push_back({static_cast<std::size_t>(left_id + 1), std::move(right), job.depth + 1});
    stack.push_back({static_cast<std::size_t>(left_id), std::move(left), job.depth + 1});
  }
  return tree;
}

std::uint64_t tree_seed(std::uint64_t seed, std::size_t t) { return mix_seed(seed, t); }

std::vector<std::size_t> tree_samples(const ForestModel& model, std::size_t n, std::size_t t) {
  if (model.bootstrap) return bootstrap_indices(n, tree_seed(model.seed, t));
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

}  // namespace

std::size_t resolve_max_features(std::size_t requested, std::size_t p) {
  if (requested == 0) requested = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p))));
  return std::clamp<std::size_t>(requested, 1, std::max<std::size_t>(p, 1));
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = static_cast<std::size_t>(rng.below(n));
  return out;
}

ForestModel rf_fit(const FeatureMatrix& x, std::span<const std::int64_t> y, const RFParams& params,
                   std::size_t num_classes) {
  if (y.empty() || x.rows() == 0) fail(ErrorCode::kDegenerateLabels, "random forest needs at least one sample");
  const std::size_t k = check_labels(y, x.rows(), num_classes);
  if (params.n_estimators < 1) fail(ErrorCode::kBadConfig, "n_estimators must be at least 1");
  if (params.max_depth && *params.max_depth < 1) fail(ErrorCode::kBadConfig, "max_depth must be at least 1");
  x.require_finite();

  ForestModel model;
  model.num_classes = k;
  model.num_features = x.cols();
  model.max_features = resolve_max_features(params.max_features, x.cols());
  model.max_depth = params.max_depth;
  model.bootstrap = params.bootstrap;
  model.seed = params.seed;
  model.trees.resize(params.n_estimators);
  parallel_for(params.n_estimators, params.threads, [&](std::size_t t) {
    const auto samples = tree_samples(model, x.rows(), t);
    Rng rng(mix_seed(tree_seed(model.seed, t), 1));
    model.trees[t] = grow_tree(x, y, k, model, samples, rng);
  });
  return model;
}

std::vector<Labels> rf_tree_predictions(const ForestModel& model, const FeatureMatrix& x) {
  require_width(x, model.num_features);
  std::vector<Labels> out(model.trees.size(), Labels(x.rows()));
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      out[t][i] = static_cast<std::int64_t>(model.trees[t].evaluate(x.row(i)));
    }
  }
  return out;
}

ScoreMatrix rf_predict_proba(const ForestModel& model, const FeatureMatrix& x) {
  const auto votes = rf_tree_predictions(model, x);
  ScoreMatrix out(x.rows(), model.num_classes);
  for (const auto& tree_votes : votes) {
    for (std::size_t i = 0; i < x.rows(); ++i) out(i, static_cast<std::size_t>(tree_votes[i])) += 1;
  }
  for (auto& v : out.values) v /= static_cast<double>(model.trees.size());
  return out;
}

Labels rf_predict(const ForestModel& model, const FeatureMatrix& x) {
  return argmax_rows(rf_predict_proba(model, x));
}

std::optional<double> rf_oob_accuracy(const ForestModel& model, const FeatureMatrix& x,
                                      std::span<const std::int64_t> y) {
  const std::size_t n = x.rows();
  check_labels(y, n, model.num_classes);
  const auto votes = rf_tree_predictions(model, x);
  std::vector<std::vector<std::size_t>> tally(n, std::vector<std::size_t>(model.num_classes, 0));
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    std::vector<char> in_bag(n, 0);
    for (auto i : tree_samples(model, n, t)) in_bag[i] = 1;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_bag[i]) ++tally[i][static_cast<std::size_t>(votes[t][i])];
    }
  }
  std::size_t scored = 0, hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t total = 0;
    for (auto c : tally[i]) total += c;
    if (total == 0) continue;
    ++scored;
    hits += majority(tally[i]) == y[i];
  }
  if (scored == 0) return std::nullopt;
  return static_cast<double>(hits) / static_cast<double>(scored);
}

}  // namespace histostack
