#pragma once

#include <cmath>
#include <filesystem>
#include <string>

#include "histostack/harness.hpp"

namespace histostack::testing {

// A complete record whose test accuracy is `percent` / 100, carried by a
// 10000-sample binary confusion matrix.
inline RunRecord record_with_accuracy(const std::string& model, const std::string& dataset, double percent) {
  const auto correct = static_cast<std::uint64_t>(std::llround(percent * 100.0));
  const auto half = correct / 2;
  const std::uint64_t wrong = 10000 - correct;
  const auto cm = confusion_from_counts(2, {half, wrong / 2, wrong - wrong / 2, correct - half}, {"benign", "malignant"});
  RunRecord r;
  r.run_id = "r";
  r.dataset_name = dataset;
  r.model_name = model;
  r.ensemble = nullptr;
  r.grid = nullptr;
  r.class_names = cm.class_names;
  r.confusion = cm;
  r.metrics = metrics_to_json(compute_metrics(cm));
  return r;
}

inline std::filesystem::path write_record_at(const std::filesystem::path& root, const RunRecord& r,
                                             const std::string& run_id = "r") {
  const auto dir = run_directory(root, r.dataset_name, r.model_name, run_id);
  write_run_record(r, dir / "hyperparameters.json");
  return dir;
}

}  // namespace histostack::testing
