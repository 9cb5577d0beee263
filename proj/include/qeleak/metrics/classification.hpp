#pragma once

#include <map>
#include <string>
#include <vector>

#include "qeleak/core/error.hpp"
#include "qeleak/core/types.hpp"

namespace qeleak::metrics {

// Unweighted mean of per-label F1 over every label in the set; a label with
// P + R = 0 contributes 0.
inline double macro_f1(const std::vector<Label>& predictions, const std::vector<Label>& golds,
                       const LabelSet& labels) {
  if (predictions.size() != golds.size())
    throw UsageError("macro_f1: " + std::to_string(predictions.size()) + " predictions vs " +
                     std::to_string(golds.size()) + " gold labels");
  if (labels.size() == 0) throw UsageError("macro_f1: empty label set");
  std::map<Label, size_t> tp, fp, fn;
  for (size_t i = 0; i < golds.size(); ++i) {
    if (predictions[i] == golds[i]) {
      ++tp[golds[i]];
    } else {
      ++fp[predictions[i]];
      ++fn[golds[i]];
    }
  }
  double sum = 0.0;
  for (const auto& l : labels.labels()) {
    const double t = static_cast<double>(tp[l]);
    const double p = t + fp[l] > 0 ? t / (t + fp[l]) : 0.0;
    const double r = t + fn[l] > 0 ? t / (t + fn[l]) : 0.0;
    sum += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  return sum / static_cast<double>(labels.size());
}

}  // namespace qeleak::metrics
