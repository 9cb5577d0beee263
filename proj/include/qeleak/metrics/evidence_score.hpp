#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qeleak/metrics/hungarian.hpp"
#include "qeleak/metrics/meteor.hpp"

namespace qeleak::metrics {

using Strings = std::vector<std::string>;
using PairScoreFn = std::function<ScoreMatrix(const Strings& candidates, const Strings& references)>;

inline ScoreMatrix meteor_matrix(const Strings& candidates, const Strings& references) {
  std::vector<std::vector<std::string>> ref_tokens;
  for (const auto& r : references) ref_tokens.push_back(text::word_tokens(r));
  ScoreMatrix m(candidates.size(), std::vector<double>(references.size(), 0.0));
  for (size_t i = 0; i < candidates.size(); ++i) {
    auto ct = text::word_tokens(candidates[i]);
    for (size_t j = 0; j < references.size(); ++j) m[i][j] = meteor_from_tokens(ct, ref_tokens[j]);
  }
  return m;
}

// Optimal one-to-one alignment of retrieved texts to gold texts under the
// pairwise scorer, normalized by the gold count.
inline double evidence_text_score(const Strings& retrieved, const Strings& gold, const PairScoreFn& scorer) {
  if (retrieved.empty() || gold.empty()) return 0.0;
  return hungarian_assign(scorer(retrieved, gold)).normalized;
}

}  // namespace qeleak::metrics
