#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "qeleak/core/error.hpp"
#include "qeleak/core/ranking.hpp"

namespace qeleak::metrics {

using RelevantSet = std::set<std::string>;

inline void check_args(const RelevantSet& relevant, size_t k) {
  if (k < 1) throw UsageError("k must be >= 1");
  if (relevant.empty()) throw DataError("empty relevant set");
}

// |top-k ∩ relevant| / |relevant|
inline double recall_at_k(const Ranking& ranking, const RelevantSet& relevant, size_t k) {
  check_args(relevant, k);
  size_t hits = 0;
  for (size_t i = 0; i < std::min(k, ranking.size()); ++i) hits += relevant.count(ranking[i].doc_id);
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

// Binary gains; the ideal ranking places min(|relevant|, k) relevant items first.
inline double ndcg_at_k(const Ranking& ranking, const RelevantSet& relevant, size_t k) {
  check_args(relevant, k);
  double dcg = 0.0, idcg = 0.0;
  for (size_t i = 0; i < std::min(k, ranking.size()); ++i)
    if (relevant.count(ranking[i].doc_id)) dcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  for (size_t i = 0; i < std::min(k, relevant.size()); ++i) idcg += 1.0 / std::log2(static_cast<double>(i) + 2.0);
  return dcg / idcg;
}

}  // namespace qeleak::metrics
