#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "histostack/feature_matrix.hpp"

namespace histostack {

enum class KernelKind { kLinear, kRbf, kPoly };

std::string_view kernel_name(KernelKind kind);
KernelKind parse_kernel(std::string_view name);

// linear: <u,v>;  rbf: exp(-gamma |u-v|^2);  poly: (gamma <u,v> + coef0)^degree.
struct KernelParams {
  KernelKind kind = KernelKind::kRbf;
  double gamma = 1.0;
  int degree = 3;
  double coef0 = 1.0;

  void validate() const;
};

double kernel_value(const KernelParams& k, std::span<const float> u, std::span<const float> v);

// Full n x n Gram matrix, row-major.
std::vector<double> gram_matrix(const FeatureMatrix& x, const KernelParams& k, int threads = 1);

struct SVCParams {
  KernelParams kernel{};
  double c = 1.0;
  double tol = 1e-3;
  long max_iter = 10'000'000;
  int threads = 1;
};

// Solution of  max sum(a) - 1/2 a'Qa,  Q_ij = y_i y_j K_ij,  0 <= a <= C,
// sum(a y) = 0, for labels y in {-1, +1}. Decision = sum a_i y_i K(x_i, .) + bias.
struct SmoSolution {
  std::vector<double> alpha;
  double bias = 0;
  long iterations = 0;
  bool converged = false;
};

// Sequential two-variable optimisation with second-order working-set
// selection; stops when the maximal KKT violation gap is below tol.
SmoSolution smo_solve(std::span<const double> gram, std::span<const double> y, double c, double tol,
                      long max_iter);

double svm_dual_objective(std::span<const double> gram, std::span<const double> y,
                          std::span<const double> alpha);

struct BinarySVM {
  FeatureMatrix support_vectors;
  std::vector<double> dual_coefs;  // alpha_i * y_i
  double bias = 0;
};

// Binary problems hold one machine (positive = class 1); k > 2 holds one
// one-vs-rest machine per class.
struct SVCModel {
  KernelParams kernel{};
  double c = 1.0;
  std::size_t num_classes = 0;
  std::size_t num_features = 0;
  std::vector<BinarySVM> machines;
  bool converged = true;
};

SVCModel svc_fit(const FeatureMatrix& x, std::span<const std::int64_t> y, const SVCParams& params,
                 std::size_t num_classes = 0);

// n x 1 for binary models, n x k otherwise.
ScoreMatrix svc_decision(const SVCModel& model, const FeatureMatrix& x);
Labels svc_predict(const SVCModel& model, const FeatureMatrix& x);

}  // namespace histostack
