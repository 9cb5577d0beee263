#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qeleak/core/config.hpp"
#include "qeleak/core/text.hpp"

namespace qeleak::match {

struct Rouge2 {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;

  double get(RougeVariant v) const {
    switch (v) {
      case RougeVariant::kP: return precision;
      case RougeVariant::kR: return recall;
      default: return f;
    }
  }
};

// Bigram overlap on lowercased alphanumeric tokens. Texts without bigrams
// score 0 unless both token sequences are identical.
inline Rouge2 rouge2(std::string_view candidate, std::string_view reference) {
  const auto c = text::word_tokens(candidate), r = text::word_tokens(reference);
  if (c.size() < 2 || r.size() < 2) {
    if (c == r && !c.empty()) return {1.0, 1.0, 1.0};
    return {};
  }
  std::map<std::pair<std::string, std::string>, int> cb, rb;
  for (size_t i = 0; i + 1 < c.size(); ++i) ++cb[{c[i], c[i + 1]}];
  for (size_t i = 0; i + 1 < r.size(); ++i) ++rb[{r[i], r[i + 1]}];
  int overlap = 0;
  for (const auto& [bg, n] : cb)
    if (auto it = rb.find(bg); it != rb.end()) overlap += std::min(n, it->second);
  if (overlap == 0) return {};
  Rouge2 out;
  out.precision = static_cast<double>(overlap) / static_cast<double>(c.size() - 1);
  out.recall = static_cast<double>(overlap) / static_cast<double>(r.size() - 1);
  out.f = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

inline double rouge2_f(std::string_view candidate, std::string_view reference) {
  return rouge2(candidate, reference).f;
}

}  // namespace qeleak::match
