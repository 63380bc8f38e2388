#include "histostack/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "histostack/error.hpp"

namespace histostack {
namespace {

std::vector<std::string> names_or_indices(std::vector<std::string> names, std::size_t k) {
  if (names.empty()) {
    for (std::size_t c = 0; c < k; ++c) names.push_back(std::to_string(c));
  }
  if (names.size() != k) fail(ErrorCode::kShapeError, "class name count does not match the class count");
  return names;
}

double ratio(std::uint64_t num, std::uint64_t den, const char* name, std::vector<std::string>& degenerate) {
  if (den == 0) {
    degenerate.emplace_back(name);
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t c = 0; c < num_classes; ++c) t += at(c, c);
  return t;
}

ConfusionMatrix confusion(std::span<const std::int64_t> y_true, std::span<const std::int64_t> y_pred, std::size_t k,
                          std::vector<std::string> class_names) {
  if (y_true.size() != y_pred.size()) {
    fail(ErrorCode::kShapeError, std::to_string(y_true.size()) + " true labels vs " + std::to_string(y_pred.size()) +
                                     " predictions");
  }
  ConfusionMatrix cm;
  cm.num_classes = k;
  cm.class_names = names_or_indices(std::move(class_names), k);
  cm.counts.assign(k * k, 0);
  const auto bound = static_cast<std::int64_t>(k);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= bound || y_pred[i] < 0 || y_pred[i] >= bound) {
      fail(ErrorCode::kBadLabel, "label outside [0, " + std::to_string(k) + ") at position " + std::to_string(i));
    }
    ++cm.at(static_cast<std::size_t>(y_true[i]), static_cast<std::size_t>(y_pred[i]));
  }
  return cm;
}

ConfusionMatrix confusion_from_counts(std::size_t k, std::vector<std::uint64_t> counts,
                                      std::vector<std::string> class_names) {
  if (counts.size() != k * k) fail(ErrorCode::kShapeError, "confusion counts must be k x k");
  ConfusionMatrix cm;
  cm.num_classes = k;
  cm.class_names = names_or_indices(std::move(class_names), k);
  cm.counts = std::move(counts);
  return cm;
}

std::size_t default_positive_class(const std::vector<std::string>& class_names) {
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    if (class_names[c] == "malignant") return c;
  }
  return 1;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm, std::optional<std::size_t> positive_class) {
  const std::size_t k = cm.num_classes;
  const std::uint64_t total = cm.total();
  if (total == 0) fail(ErrorCode::kBadInput, "confusion matrix is empty");

  MetricsReport report;
  report.total = total;
  for (std::size_t c = 0; c < k; ++c) {
    ClassMetrics m;
    m.name = cm.class_names[c];
    std::uint64_t row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += cm.at(c, j);
      col += cm.at(j, c);
    }
    m.tp = cm.at(c, c);
    m.fn = row - m.tp;
    m.fp = col - m.tp;
    m.tn = total - m.tp - m.fn - m.fp;
    m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(total);
    m.precision = ratio(m.tp, m.tp + m.fp, "precision", m.degenerate);
    m.recall = ratio(m.tp, m.tp + m.fn, "recall", m.degenerate);
    m.f1 = ratio(2 * m.tp, 2 * m.tp + m.fp + m.fn, "f1", m.degenerate);
    m.specificity = ratio(m.tn, m.tn + m.fp, "specificity", m.degenerate);
    report.per_class.push_back(std::move(m));
  }

  auto& agg = report.aggregate;
  agg.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(total);
  if (k == 2) {
    const std::size_t pos = positive_class.value_or(default_positive_class(cm.class_names));
    if (pos >= 2) fail(ErrorCode::kBadLabel, "positive class index out of range");
    report.positive_class = pos;
    report.averaging = "positive-class";
    const auto& m = report.per_class[pos];
    agg.precision = m.precision;
    agg.recall = m.recall;
    agg.f1 = m.f1;
    agg.specificity = m.specificity;
  } else {
    report.averaging = "macro";
    for (const auto& m : report.per_class) {
      agg.precision += m.precision;
      agg.recall += m.recall;
      agg.f1 += m.f1;
      agg.specificity += m.specificity;
    }
    const double kk = static_cast<double>(k);
    agg.precision /= kk;
    agg.recall /= kk;
    agg.f1 /= kk;
    agg.specificity /= kk;
  }
  return report;
}

double percent(double fraction) { return std::floor(fraction * 10000.0 + 0.5 + 1e-9) / 100.0; }

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", percent(fraction));
  return buf;
}

nlohmann::json confusion_to_json(const ConfusionMatrix& cm) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < cm.num_classes; ++i) {
    std::vector<std::uint64_t> row(cm.counts.begin() + static_cast<std::ptrdiff_t>(i * cm.num_classes),
                                   cm.counts.begin() + static_cast<std::ptrdiff_t>((i + 1) * cm.num_classes));
    rows.push_back(row);
  }
  return {{"class_names", cm.class_names}, {"counts", rows}};
}

ConfusionMatrix confusion_from_json(const nlohmann::json& doc) {
  try {
    auto names = doc.at("class_names").get<std::vector<std::string>>();
    const auto rows = doc.at("counts").get<std::vector<std::vector<std::uint64_t>>>();
    std::vector<std::uint64_t> flat;
    for (const auto& r : rows) {
      if (r.size() != rows.size()) fail(ErrorCode::kShapeError, "confusion matrix must be square");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return confusion_from_counts(rows.size(), std::move(flat), std::move(names));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormatError, std::string("malformed confusion matrix: ") + e.what());
  }
}

nlohmann::json metrics_to_json(const MetricsReport& report) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const auto& m : report.per_class) {
    per_class.push_back({{"class", m.name},
                         {"tp", m.tp},
                         {"tn", m.tn},
                         {"fp", m.fp},
                         {"fn", m.fn},
                         {"accuracy", m.accuracy},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"specificity", m.specificity},
                         {"degenerate", m.degenerate}});
  }
  const auto& a = report.aggregate;
  nlohmann::json doc = {{"averaging", report.averaging},
                        {"total", report.total},
                        {"aggregate",
                         {{"accuracy", a.accuracy},
                          {"precision", a.precision},
                          {"recall", a.recall},
                          {"f1", a.f1},
                          {"specificity", a.specificity}}},
                        {"per_class", per_class}};
  doc["positive_class"] = report.positive_class ? nlohmann::json(report.per_class[*report.positive_class].name)
                                                : nlohmann::json(nullptr);
  return doc;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::ostringstream out;
  out << "truth\\predicted";
  for (const auto& n : cm.class_names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < cm.num_classes; ++i) {
    out << cm.class_names[i];
    for (std::size_t j = 0; j < cm.num_classes; ++j) out << ',' << cm.at(i, j);
    out << '\n';
  }
  return out.str();
}

std::string metrics_table_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "class,accuracy,precision,recall,f1,specificity\n";
  for (const auto& m : report.per_class) {
    out << m.name << ',' << format_percent(m.accuracy) << ',' << format_percent(m.precision) << ','
        << format_percent(m.recall) << ',' << format_percent(m.f1) << ',' << format_percent(m.specificity) << '\n';
  }
  const auto& a = report.aggregate;
  out << "aggregate(" << report.averaging << ")," << format_percent(a.accuracy) << ',' << format_percent(a.precision)
      << ',' << format_percent(a.recall) << ',' << format_percent(a.f1) << ',' << format_percent(a.specificity) << '\n';
  return out.str();
}

}  // namespace histostack
