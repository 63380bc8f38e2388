#include "histostack/classifiers/gbdt.hpp"

#include <cmath>
#include <numeric>

#include "histostack/parallel.hpp"
#include "presort.hpp"

namespace histostack {
namespace {

double sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

struct Candidate {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0;
  double gain = 0;
};

struct Leaf {
  std::size_t node;
  detail::SortedSamples samples;
  Candidate split;
};

class LeafWiseBuilder {
 public:
  LeafWiseBuilder(const FeatureMatrix& x, const std::vector<double>& g, const std::vector<double>& h,
                  const GBDTModel& spec)
      : x_(x), g_(g), h_(h), spec_(spec) {}

  Tree build(detail::SortedSamples root) {
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<Leaf> leaves;
    leaves.push_back(make_leaf(0, std::move(root)));
    while (leaves.size() < spec_.num_leaves) {
      // Leaf with the largest positive gain; earliest-created wins ties.
      std::size_t pick = leaves.size();
      for (std::size_t l = 0; l < leaves.size(); ++l) {
        if (!leaves[l].split.found) continue;
        if (pick == leaves.size() || leaves[l].split.gain > leaves[pick].split.gain) pick = l;
      }
      if (pick == leaves.size()) break;
      Leaf leaf = std::move(leaves[pick]);
      leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(pick));
      auto [left, right] = detail::partition(leaf.samples, x_, leaf.split.feature, leaf.split.threshold);
      const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[leaf.node];
      node.feature = static_cast<std::int32_t>(leaf.split.feature);
      node.threshold = leaf.split.threshold;
      node.left = left_id;
      node.right = left_id + 1;
      leaves.push_back(make_leaf(static_cast<std::size_t>(left_id), std::move(left)));
      leaves.push_back(make_leaf(static_cast<std::size_t>(left_id + 1), std::move(right)));
    }
    for (const auto& leaf : leaves) {
      double gs = 0, hs = 0;
      for (auto i : leaf.samples.any_order()) {
        gs += g_[i];
        hs += h_[i];
      }
      tree.nodes[leaf.node].value = -gs / (hs + spec_.lambda);
    }
    return tree;
  }

 private:
  Leaf make_leaf(std::size_t node, detail::SortedSamples samples) {
    Leaf leaf{node, std::move(samples), {}};
    const std::size_t m = leaf.samples.size();
    if (m < 2 * spec_.min_samples_leaf) return leaf;
    double gs = 0, hs = 0;
    for (auto i : leaf.samples.any_order()) {
      gs += g_[i];
      hs += h_[i];
    }
    const double lambda = spec_.lambda;
    const double parent = gs * gs / (hs + lambda);
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      const auto& sorted = leaf.samples.by_feature[f];
      double gl = 0, hl = 0;
      for (std::size_t pos = 0; pos + 1 < m; ++pos) {
        gl += g_[sorted[pos]];
        hl += h_[sorted[pos]];
        const std::size_t nl = pos + 1;
        if (nl < spec_.min_samples_leaf || m - nl < spec_.min_samples_leaf) continue;
        const float a = x_(sorted[pos], f), b = x_(sorted[pos + 1], f);
        if (!(a < b)) continue;
        const double gr = gs - gl, hr = hs - hl;
        const double gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent;
        if (gain > 0 && (!leaf.split.found || gain > leaf.split.gain)) {
          leaf.split = {true, f, detail::midpoint(a, b), gain};
        }
      }
    }
    return leaf;
  }

  const FeatureMatrix& x_;
  const std::vector<double>& g_;
  const std::vector<double>& h_;
  const GBDTModel& spec_;
};

}  // namespace

GBDTModel gbdt_fit(const FeatureMatrix& x, std::span<const std::int64_t> y, const GBDTParams& params,
                   std::size_t num_classes) {
  const std::size_t k = check_labels(y, x.rows(), num_classes);
  if (x.rows() == 0 || distinct_labels(y) < 2) {
    fail(ErrorCode::kDegenerateLabels, "gradient boosting needs at least two classes");
  }
  if (params.n_stages < 1) fail(ErrorCode::kBadConfig, "n_stages must be at least 1");
  if (!(params.learning_rate > 0 && params.learning_rate <= 1)) {
    fail(ErrorCode::kBadConfig, "learning_rate must lie in (0, 1]");
  }
  if (params.num_leaves < 2) fail(ErrorCode::kBadConfig, "num_leaves must be at least 2");
  if (params.min_samples_leaf < 1) fail(ErrorCode::kBadConfig, "min_samples_leaf must be at least 1");
  if (!(params.lambda >= 0)) fail(ErrorCode::kBadConfig, "lambda must be non-negative");
  x.require_finite();

  const std::size_t n = x.rows();
  GBDTModel model;
  model.num_classes = k;
  model.num_features = x.cols();
  model.num_leaves = params.num_leaves;
  model.min_samples_leaf = params.min_samples_leaf;
  model.learning_rate = params.learning_rate;
  model.lambda = params.lambda;
  model.initial_scores.assign(k, 0.0);
  model.stages.assign(k, {});

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const auto root = detail::presort(x, all);

  parallel_for(k, params.threads, [&](std::size_t cls) {
    std::vector<double> t(n);
    double positives = 0;
    for (std::size_t i = 0; i < n; ++i) positives += t[i] = y[i] == static_cast<std::int64_t>(cls) ? 1.0 : 0.0;
    const double prior = positives / static_cast<double>(n);
    const double f0 = std::clamp(std::log(prior / (1 - prior)), -kInitialScoreClamp, kInitialScoreClamp);
    model.initial_scores[cls] = f0;
    std::vector<double> score(n, f0), g(n), h(n);
    auto& stages = model.stages[cls];
    stages.reserve(params.n_stages);
    for (std::size_t m = 0; m < params.n_stages; ++m) {
      for (std::size_t i = 0; i < n; ++i) {
        const double s = sigmoid(score[i]);
        g[i] = s - t[i];
        h[i] = s * (1 - s);
      }
      LeafWiseBuilder builder(x, g, h, model);
      BoostStage stage{builder.build(root), params.learning_rate};
      for (std::size_t i = 0; i < n; ++i) score[i] += stage.shrinkage * stage.tree.evaluate(x.row(i));
      stages.push_back(std::move(stage));
    }
  });
  return model;
}

ScoreMatrix gbdt_decision(const GBDTModel& model, const FeatureMatrix& x, std::optional<std::size_t> stages) {
  require_width(x, model.num_features);
  ScoreMatrix out(x.rows(), model.num_classes);
  for (std::size_t c = 0; c < model.num_classes; ++c) {
    const auto& seq = model.stages[c];
    const std::size_t upto = std::min(stages.value_or(seq.size()), seq.size());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      double s = model.initial_scores[c];
      for (std::size_t m = 0; m < upto; ++m) s += seq[m].shrinkage * seq[m].tree.evaluate(x.row(i));
      out(i, c) = s;
    }
  }
  return out;
}

ScoreMatrix gbdt_predict_proba(const GBDTModel& model, const FeatureMatrix& x, std::optional<std::size_t> stages) {
  auto out = gbdt_decision(model, x, stages);
  for (std::size_t i = 0; i < out.rows; ++i) {
    // log sigmoid(z) = -softplus(-z); shifting by the maximum keeps far
    // negative scores from underflowing every class to zero.
    double top = -INFINITY;
    for (std::size_t c = 0; c < out.cols; ++c) {
      const double z = out(i, c);
      out(i, c) = -(std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z))));
      top = std::max(top, out(i, c));
    }
    double total = 0;
    for (std::size_t c = 0; c < out.cols; ++c) total += (out(i, c) = std::exp(out(i, c) - top));
    for (std::size_t c = 0; c < out.cols; ++c) out(i, c) /= total;
  }
  return out;
}

Labels gbdt_predict(const GBDTModel& model, const FeatureMatrix& x) {
  return argmax_rows(gbdt_predict_proba(model, x));
}

}  // namespace histostack
