#include "histostack/classifiers/svc.hpp"

#include <cmath>
#include <limits>

#include "histostack/parallel.hpp"

namespace histostack {

std::string_view kernel_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::kLinear: return "linear";
    case KernelKind::kRbf: return "rbf";
    case KernelKind::kPoly: return "poly";
  }
  return "rbf";
}

KernelKind parse_kernel(std::string_view name) {
  if (name == "linear") return KernelKind::kLinear;
  if (name == "rbf") return KernelKind::kRbf;
  if (name == "poly") return KernelKind::kPoly;
  fail(ErrorCode::kBadKernelParams, "unknown kernel '" + std::string(name) + "'");
}

void KernelParams::validate() const {
  if (kind != KernelKind::kLinear && !(gamma > 0)) {
    fail(ErrorCode::kBadKernelParams, "gamma must be positive for rbf/poly kernels");
  }
  if (kind == KernelKind::kPoly && degree < 1) {
    fail(ErrorCode::kBadKernelParams, "poly degree must be at least 1");
  }
}

double kernel_value(const KernelParams& k, std::span<const float> u, std::span<const float> v) {
  switch (k.kind) {
    case KernelKind::kLinear: {
      double d = 0;
      for (std::size_t i = 0; i < u.size(); ++i) d += static_cast<double>(u[i]) * v[i];
      return d;
    }
    case KernelKind::kRbf: {
      double d = 0;
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double diff = static_cast<double>(u[i]) - v[i];
        d += diff * diff;
      }
      return std::exp(-k.gamma * d);
    }
    case KernelKind::kPoly: {
      double d = 0;
      for (std::size_t i = 0; i < u.size(); ++i) d += static_cast<double>(u[i]) * v[i];
      return std::pow(k.gamma * d + k.coef0, k.degree);
    }
  }
  return 0;
}

std::vector<double> gram_matrix(const FeatureMatrix& x, const KernelParams& k, int threads) {
  const std::size_t n = x.rows();
  std::vector<double> gram(n * n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) gram[i * n + j] = kernel_value(k, x.row(i), x.row(j));
  });
  return gram;
}

double svm_dual_objective(std::span<const double> gram, std::span<const double> y,
                          std::span<const double> alpha) {
  const std::size_t n = y.size();
  double linear = 0, quad = 0;
  for (std::size_t i = 0; i < n; ++i) {
    linear += alpha[i];
    if (alpha[i] == 0) continue;
    for (std::size_t j = 0; j < n; ++j) quad += alpha[i] * alpha[j] * y[i] * y[j] * gram[i * n + j];
  }
  return linear - 0.5 * quad;
}

SmoSolution smo_solve(std::span<const double> gram, std::span<const double> y, double c, double tol,
                      long max_iter) {
  const std::size_t n = y.size();
  constexpr double kTau = 1e-12;
  const double inf = std::numeric_limits<double>::infinity();
  auto Q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * gram[i * n + j]; };

  SmoSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a
  auto& a = sol.alpha;
  auto in_up = [&](std::size_t t) { return (y[t] > 0 && a[t] < c) || (y[t] < 0 && a[t] > 0); };
  auto in_low = [&](std::size_t t) { return (y[t] > 0 && a[t] > 0) || (y[t] < 0 && a[t] < c); };

  for (sol.iterations = 0; sol.iterations < max_iter; ++sol.iterations) {
    // i: maximal violating index in I_up.
    double gmax = -inf;
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] > gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    // j: second-order choice in I_low; also track the gap.
    double gmin = inf, best = inf;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -y[t] * grad[t];
      gmin = std::min(gmin, v);
      if (i == n) continue;
      const double b = gmax - v;
      if (b > 0) {
        double curv = gram[i * n + i] + gram[t * n + t] - 2.0 * y[i] * y[t] * Q(i, t);
        if (curv <= 0) curv = kTau;
        const double score = -(b * b) / curv;
        if (score < best) {
          best = score;
          j = t;
        }
      }
    }
    if (i == n || j == n || gmax - gmin < tol) {
      sol.converged = true;
      break;
    }

    const double old_ai = a[i], old_aj = a[j];
    const double qii = gram[i * n + i], qjj = gram[j * n + j], qij = Q(i, j);
    if (y[i] != y[j]) {
      double quad = qii + qjj + 2 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) { a[j] = 0; a[i] = diff; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = -diff; }
      }
      if (diff > 0) {
        if (a[i] > c) { a[i] = c; a[j] = c - diff; }
      } else {
        if (a[j] > c) { a[j] = c; a[i] = c + diff; }
      }
    } else {
      double quad = qii + qjj - 2 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) { a[i] = c; a[j] = sum - c; }
      } else {
        if (a[j] < 0) { a[j] = 0; a[i] = sum; }
      }
      if (sum > c) {
        if (a[j] > c) { a[j] = c; a[i] = sum - c; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = sum; }
      }
    }
    const double di = a[i] - old_ai, dj = a[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += Q(t, i) * di + Q(t, j) * dj;
  }

  // Bias from free vectors, or the midpoint of the feasible interval.
  double sum_free = 0, ub = inf, lb = -inf;
  std::size_t free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (a[t] > 0 && a[t] < c) {
      sum_free += yg;
      ++free;
    } else if ((a[t] >= c && y[t] < 0) || (a[t] <= 0 && y[t] > 0)) {
      ub = std::min(ub, yg);
    } else {
      lb = std::max(lb, yg);
    }
  }
  double rho = 0;
  if (free > 0) rho = sum_free / static_cast<double>(free);
  else if (std::isfinite(ub) && std::isfinite(lb)) rho = (ub + lb) / 2;
  else if (std::isfinite(ub)) rho = ub;
  else if (std::isfinite(lb)) rho = lb;
  sol.bias = -rho;
  return sol;
}

SVCModel svc_fit(const FeatureMatrix& x, std::span<const std::int64_t> y, const SVCParams& params,
                 std::size_t num_classes) {
  const std::size_t k = check_labels(y, x.rows(), num_classes);
  if (distinct_labels(y) < 2) fail(ErrorCode::kDegenerateLabels, "SVC needs at least two classes");
  if (!(params.c > 0)) fail(ErrorCode::kBadConfig, "C must be positive");
  params.kernel.validate();
  x.require_finite();

  SVCModel model;
  model.kernel = params.kernel;
  model.c = params.c;
  model.num_classes = k;
  model.num_features = x.cols();

  const std::size_t n = x.rows();
  const auto gram = gram_matrix(x, params.kernel, params.threads);
  const std::size_t machines = k == 2 ? 1 : k;
  model.machines.resize(machines);
  std::vector<char> converged(machines, 1);
  parallel_for(machines, params.threads, [&](std::size_t m) {
    const auto positive = static_cast<std::int64_t>(k == 2 ? 1 : m);
    std::vector<double> signs(n);
    bool any_positive = false;
    for (std::size_t i = 0; i < n; ++i) {
      signs[i] = y[i] == positive ? 1.0 : -1.0;
      any_positive = any_positive || signs[i] > 0;
    }
    BinarySVM machine;
    machine.support_vectors = FeatureMatrix(0, x.cols());
    if (!any_positive) {
      // Class absent from training: the machine always votes against it.
      machine.bias = -1.0;
      model.machines[m] = std::move(machine);
      return;
    }
    const auto sol = smo_solve(gram, signs, params.c, params.tol, params.max_iter);
    converged[m] = sol.converged;
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < n; ++i) {
      if (sol.alpha[i] > 0) {
        support.push_back(i);
        machine.dual_coefs.push_back(sol.alpha[i] * signs[i]);
      }
    }
    machine.support_vectors = x.select_rows(support);
    machine.bias = sol.bias;
    model.machines[m] = std::move(machine);
  });
  for (char c : converged) model.converged = model.converged && c;
  return model;
}

ScoreMatrix svc_decision(const SVCModel& model, const FeatureMatrix& x) {
  require_width(x, model.num_features);
  ScoreMatrix out(x.rows(), model.machines.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t m = 0; m < model.machines.size(); ++m) {
      const auto& machine = model.machines[m];
      double f = machine.bias;
      for (std::size_t s = 0; s < machine.dual_coefs.size(); ++s) {
        f += machine.dual_coefs[s] * kernel_value(model.kernel, machine.support_vectors.row(s), x.row(i));
      }
      out(i, m) = f;
    }
  }
  return out;
}

Labels svc_predict(const SVCModel& model, const FeatureMatrix& x) {
  const auto scores = svc_decision(model, x);
  if (model.num_classes == 2) {
    Labels out(scores.rows);
    for (std::size_t i = 0; i < scores.rows; ++i) out[i] = scores(i, 0) > 0 ? 1 : 0;
    return out;
  }
  return argmax_rows(scores);
}

}  // namespace histostack
