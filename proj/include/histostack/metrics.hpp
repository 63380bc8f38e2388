#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace histostack {

// Rows are ground truth, columns are predictions.
struct ConfusionMatrix {
  std::vector<std::string> class_names;
  std::size_t num_classes = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts[truth * num_classes + predicted]; }
  std::uint64_t& at(std::size_t truth, std::size_t predicted) { return counts[truth * num_classes + predicted]; }
  std::uint64_t total() const;
  std::uint64_t trace() const;
  bool operator==(const ConfusionMatrix&) const = default;
};

// class_names may be empty; otherwise it must have k entries.
ConfusionMatrix confusion(std::span<const std::int64_t> y_true, std::span<const std::int64_t> y_pred, std::size_t k,
                          std::vector<std::string> class_names = {});

// Builds a matrix from explicit counts (row-major, k x k).
ConfusionMatrix confusion_from_counts(std::size_t k, std::vector<std::uint64_t> counts,
                                      std::vector<std::string> class_names = {});

struct ClassMetrics {
  std::string name;
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0, specificity = 0;
  std::vector<std::string> degenerate;  // metrics whose ratio was 0/0
};

struct AggregateMetrics {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0, specificity = 0;
};

// "positive-class" for two classes, "macro" otherwise.
struct MetricsReport {
  std::vector<ClassMetrics> per_class;
  AggregateMetrics aggregate;
  std::string averaging;
  std::optional<std::size_t> positive_class;
  std::uint64_t total = 0;
};

// "malignant" when present, otherwise index 1.
std::size_t default_positive_class(const std::vector<std::string>& class_names);

// For two classes the aggregate is the positive class's one-vs-rest values
// (accuracy is always trace / total); for more classes it is the macro mean.
MetricsReport compute_metrics(const ConfusionMatrix& cm, std::optional<std::size_t> positive_class = std::nullopt);

// Percentage rounded half-up to two decimals, e.g. 0.99637 -> 99.64.
double percent(double fraction);
std::string format_percent(double fraction);

nlohmann::json confusion_to_json(const ConfusionMatrix& cm);
ConfusionMatrix confusion_from_json(const nlohmann::json& doc);
nlohmann::json metrics_to_json(const MetricsReport& report);

// Header row of class names, then one row per true class.
std::string confusion_csv(const ConfusionMatrix& cm);
// One row per class plus an aggregate row, values in percent.
std::string metrics_table_csv(const MetricsReport& report);

}  // namespace histostack
