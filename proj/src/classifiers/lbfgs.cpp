#include "histostack/classifiers/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace histostack {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double inf_norm(std::span<const double> v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct CurvaturePair {
  std::vector<double> s, y;
  double rho;
};

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& objective, std::vector<double>& x,
                           const LbfgsOptions& options) {
  const std::size_t n = x.size();
  std::vector<double> grad(n), direction(n), x_next(n), grad_next(n);
  std::deque<CurvaturePair> history;
  std::vector<double> alpha(static_cast<std::size_t>(options.memory));

  LbfgsResult result;
  result.value = objective(x, grad);
  result.grad_inf_norm = inf_norm(grad);

  for (result.iterations = 0; result.iterations < options.max_iter; ++result.iterations) {
    if (result.grad_inf_norm <= options.grad_tol) {
      result.converged = true;
      return result;
    }

    // Two-loop recursion: direction = -H * grad.
    std::copy(grad.begin(), grad.end(), direction.begin());
    for (std::size_t k = history.size(); k-- > 0;) {
      const auto& p = history[k];
      alpha[k] = p.rho * dot(p.s, direction);
      for (std::size_t i = 0; i < n; ++i) direction[i] -= alpha[k] * p.y[i];
    }
    double scale = 1.0;
    if (!history.empty()) {
      const auto& last = history.back();
      scale = dot(last.s, last.y) / dot(last.y, last.y);
    } else {
      scale = 1.0 / std::max(1.0, std::sqrt(dot(grad, grad)));
    }
    for (auto& d : direction) d *= scale;
    for (std::size_t k = 0; k < history.size(); ++k) {
      const auto& p = history[k];
      const double beta = p.rho * dot(p.y, direction);
      for (std::size_t i = 0; i < n; ++i) direction[i] += (alpha[k] - beta) * p.s[i];
    }
    for (auto& d : direction) d = -d;

    double slope = dot(grad, direction);
    if (slope >= 0) {
      // Not a descent direction; restart from steepest descent.
      history.clear();
      for (std::size_t i = 0; i < n; ++i) direction[i] = -grad[i];
      slope = dot(grad, direction);
    }

    double step = 1.0;
    double value_next = 0;
    bool accepted = false;
    for (int b = 0; b < options.max_backtracks; ++b) {
      for (std::size_t i = 0; i < n; ++i) x_next[i] = x[i] + step * direction[i];
      value_next = objective(x_next, grad_next);
      if (std::isfinite(value_next) && value_next <= result.value + options.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    CurvaturePair pair;
    pair.s.resize(n);
    pair.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      pair.s[i] = x_next[i] - x[i];
      pair.y[i] = grad_next[i] - grad[i];
    }
    const double sy = dot(pair.s, pair.y);
    if (sy > 1e-12 * std::sqrt(dot(pair.y, pair.y) * dot(pair.s, pair.s))) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (history.size() > static_cast<std::size_t>(options.memory)) history.pop_front();
    }
    x.swap(x_next);
    grad.swap(grad_next);
    result.value = value_next;
    result.grad_inf_norm = inf_norm(grad);
  }
  result.converged = result.grad_inf_norm <= options.grad_tol;
  return result;
}

}  // namespace histostack
