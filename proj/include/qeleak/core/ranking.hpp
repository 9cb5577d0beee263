#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace qeleak {

struct Hit {
  std::string doc_id;
  double score = 0.0;
  bool operator==(const Hit&) const = default;
};

// Score descending, ties broken by doc_id ascending.
using Ranking = std::vector<Hit>;

inline bool ranks_before(const Hit& a, const Hit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

inline Ranking top_k(Ranking candidates, size_t k) {
  if (candidates.size() > k) {
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(),
                      ranks_before);
    candidates.resize(k);
  } else {
    std::sort(candidates.begin(), candidates.end(), ranks_before);
  }
  return candidates;
}

}  // namespace qeleak
