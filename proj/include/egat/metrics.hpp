#pragma once

#include "egat/residue_table.hpp"

#include <array>
#include <cstdint>
#include <span>

namespace egat {

struct ClassMetrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  double roc_auc = 0.0;  // NaN when only one label value is present
  bool auc_defined() const { return roc_auc == roc_auc; }
};

// Accuracy, F1 and MCC at `threshold` (score >= threshold is positive) and the
// threshold-free ROC-AUC. AUC comes from the Mann-Whitney rank sum with
// average ranks for ties, so tied positive/negative pairs earn half credit.
ClassMetrics compute_metrics(std::span<const double> scores, std::span<const std::uint8_t> labels,
                             double threshold = 0.5);

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

// (TP*TN - FP*FN) / sqrt((TP+FP)(TP+FN)(TN+FP)(TN+FN)); 0 when the denominator is 0.
double matthews(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);

using MetricsReport = std::array<ClassMetrics, kNumBindingClasses>;

// Mean over classes with a defined AUC; NaN if none.
double mean_auc(const MetricsReport& r);

}  // namespace egat
