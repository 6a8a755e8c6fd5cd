#include "egat/metrics.hpp"

#include "egat/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace egat {

double matthews(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  const double a = static_cast<double>(tp), b = static_cast<double>(fp);
  const double c = static_cast<double>(tn), d = static_cast<double>(fn);
  const double denom = (a + b) * (a + d) * (c + b) * (c + d);
  if (denom == 0.0) return 0.0;
  return (a * c - b * d) / std::sqrt(denom);
}

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) fail(ErrorCode::ShapeMismatch, "scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double pos_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j share their average.
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]]) {
        pos_rank_sum += avg_rank;
        ++positives;
      }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) return std::numeric_limits<double>::quiet_NaN();
  const double p = static_cast<double>(positives);
  const double u = pos_rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

ClassMetrics compute_metrics(std::span<const double> scores, std::span<const std::uint8_t> labels,
                             double threshold) {
  if (scores.size() != labels.size()) fail(ErrorCode::ShapeMismatch, "scores and labels differ in length");
  ClassMetrics m;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    const bool truth = labels[i] != 0;
    if (pred && truth) ++m.tp;
    else if (pred) ++m.fp;
    else if (truth) ++m.fn;
    else ++m.tn;
  }
  const double n = static_cast<double>(scores.size());
  m.accuracy = n > 0 ? static_cast<double>(m.tp + m.tn) / n : 0.0;
  const double f1_denom = static_cast<double>(2 * m.tp + m.fp + m.fn);
  m.f1 = f1_denom > 0 ? 2.0 * static_cast<double>(m.tp) / f1_denom : 0.0;
  m.mcc = matthews(m.tp, m.fp, m.tn, m.fn);
  m.roc_auc = roc_auc(scores, labels);
  return m;
}

double mean_auc(const MetricsReport& r) {
  double total = 0.0;
  int count = 0;
  for (const auto& c : r)
    if (c.auc_defined()) {
      total += c.roc_auc;
      ++count;
    }
  return count ? total / count : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace egat
