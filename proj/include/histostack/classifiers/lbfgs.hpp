#pragma once

#include <functional>
#include <span>
#include <vector>

namespace histostack {

struct LbfgsOptions {
  int memory = 10;
  int max_iter = 1000;
  double grad_tol = 1e-4;  // on the infinity norm of the gradient
  double armijo = 1e-4;
  int max_backtracks = 60;
};

struct LbfgsResult {
  double value = 0;
  double grad_inf_norm = 0;
  int iterations = 0;
  bool converged = false;
};

// Objective returns f(x) and writes the gradient into `grad`.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

// Limited-memory BFGS with a backtracking Armijo line search; x is updated in
// place. Curvature pairs with s'y <= 0 are skipped.
LbfgsResult lbfgs_minimize(const Objective& objective, std::vector<double>& x,
                           const LbfgsOptions& options);

}  // namespace histostack
