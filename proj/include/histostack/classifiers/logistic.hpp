#pragma once

#include <span>
#include <vector>

#include "histostack/feature_matrix.hpp"

namespace histostack {

struct LRParams {
  double c = 1.0;  // inverse L2 strength
  double tol = 1e-4;
  int max_iter = 1000;
  int threads = 1;
};

// One-vs-rest logistic regression. Row c of (intercepts, coefficients) models
// the log-odds of class c against the rest. With two classes a single problem
// is solved for class 0 and class 1 stores its negation, so the two
// probabilities are exactly the sigmoid pair.
struct LRModel {
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  double c = 1.0;
  std::vector<double> intercepts;
  std::vector<std::vector<double>> coefficients;
  bool converged = true;
  std::vector<int> iterations;
};

// Regularized binary objective over params = (b, w_1..w_p) for targets in {0,1}:
//   c * sum_i log(1 + exp(-s_i (b + w.x_i))) + 0.5 * |w|^2,  s_i = 2 t_i - 1.
// The intercept is not penalized. Writes the gradient when grad is non-empty.
double lr_objective(const FeatureMatrix& x, std::span<const double> targets, double c,
                    std::span<const double> params, std::span<double> grad);

LRModel lr_fit(const FeatureMatrix& x, std::span<const std::int64_t> y, const LRParams& params,
               std::size_t num_classes = 0);

// Raw per-class log-odds b_c + w_c.x.
ScoreMatrix lr_decision(const LRModel& model, const FeatureMatrix& x);
ScoreMatrix lr_predict_proba(const LRModel& model, const FeatureMatrix& x);
Labels lr_predict(const LRModel& model, const FeatureMatrix& x);

}  // namespace histostack
