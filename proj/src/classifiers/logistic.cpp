#include "histostack/classifiers/logistic.hpp"

#include <cmath>

#include "histostack/classifiers/lbfgs.hpp"
#include "histostack/parallel.hpp"

namespace histostack {
namespace {

// log(1 + exp(v)) without overflow.
double softplus(double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); }

double sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

}  // namespace

double lr_objective(const FeatureMatrix& x, std::span<const double> targets, double c,
                    std::span<const double> params, std::span<double> grad) {
  const std::size_t p = x.cols();
  const double bias = params[0];
  const auto w = params.subspan(1);
  double loss = 0;
  if (!grad.empty()) std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    double z = bias;
    for (std::size_t j = 0; j < p; ++j) z += w[j] * row[j];
    const double sign = targets[i] > 0.5 ? 1.0 : -1.0;
    loss += softplus(-sign * z);
    if (!grad.empty()) {
      const double r = sigmoid(z) - targets[i];
      grad[0] += c * r;
      for (std::size_t j = 0; j < p; ++j) grad[j + 1] += c * r * row[j];
    }
  }
  double penalty = 0;
  for (std::size_t j = 0; j < p; ++j) {
    penalty += w[j] * w[j];
    if (!grad.empty()) grad[j + 1] += w[j];
  }
  return c * loss + 0.5 * penalty;
}

LRModel lr_fit(const FeatureMatrix& x, std::span<const std::int64_t> y, const LRParams& params,
               std::size_t num_classes) {
  const std::size_t k = check_labels(y, x.rows(), num_classes);
  if (x.rows() < 2 || distinct_labels(y) < 2) {
    fail(ErrorCode::kDegenerateLabels, "logistic regression needs at least two classes");
  }
  if (!(params.c > 0)) fail(ErrorCode::kBadConfig, "c must be positive");
  x.require_finite();

  LRModel model;
  model.num_classes = k;
  model.num_features = x.cols();
  model.c = params.c;
  model.intercepts.assign(k, 0.0);
  model.coefficients.assign(k, std::vector<double>(x.cols(), 0.0));
  model.iterations.assign(k, 0);

  const std::size_t problems = k == 2 ? 1 : k;
  std::vector<char> converged(problems, 1);
  parallel_for(problems, params.threads, [&](std::size_t cls) {
    std::vector<double> targets(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) targets[i] = y[i] == static_cast<std::int64_t>(cls) ? 1.0 : 0.0;
    std::vector<double> theta(x.cols() + 1, 0.0);
    LbfgsOptions opts;
    opts.grad_tol = params.tol;
    opts.max_iter = params.max_iter;
    const auto result = lbfgs_minimize(
        [&](std::span<const double> t, std::span<double> g) { return lr_objective(x, targets, params.c, t, g); },
        theta, opts);
    model.intercepts[cls] = theta[0];
    std::copy(theta.begin() + 1, theta.end(), model.coefficients[cls].begin());
    model.iterations[cls] = result.iterations;
    converged[cls] = result.converged;
  });
  if (k == 2) {
    model.intercepts[1] = -model.intercepts[0];
    for (std::size_t j = 0; j < x.cols(); ++j) model.coefficients[1][j] = -model.coefficients[0][j];
    model.iterations[1] = model.iterations[0];
  }
  for (char c : converged) model.converged = model.converged && c;
  return model;
}

ScoreMatrix lr_decision(const LRModel& model, const FeatureMatrix& x) {
  require_width(x, model.num_features);
  ScoreMatrix out(x.rows(), model.num_classes);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    for (std::size_t c = 0; c < model.num_classes; ++c) {
      double z = model.intercepts[c];
      for (std::size_t j = 0; j < model.num_features; ++j) z += model.coefficients[c][j] * row[j];
      out(i, c) = z;
    }
  }
  return out;
}

ScoreMatrix lr_predict_proba(const LRModel& model, const FeatureMatrix& x) {
  auto scores = lr_decision(model, x);
  for (std::size_t i = 0; i < scores.rows; ++i) {
    if (model.num_classes == 2) {
      const double z = scores(i, 0);
      // P(first) = e^z / (1 + e^z), P(second) = 1 / (1 + e^z).
      scores(i, 0) = sigmoid(z);
      scores(i, 1) = sigmoid(-z);
      continue;
    }
    // Normalize sigmoid scores in the log domain so far-negative logits
    // cannot underflow every class to zero.
    double top = -INFINITY;
    for (std::size_t c = 0; c < scores.cols; ++c) {
      scores(i, c) = -softplus(-scores(i, c));
      top = std::max(top, scores(i, c));
    }
    double total = 0;
    for (std::size_t c = 0; c < scores.cols; ++c) total += (scores(i, c) = std::exp(scores(i, c) - top));
    for (std::size_t c = 0; c < scores.cols; ++c) scores(i, c) /= total;
  }
  return scores;
}

Labels lr_predict(const LRModel& model, const FeatureMatrix& x) {
  return argmax_rows(lr_predict_proba(model, x));
}

}  // namespace histostack
