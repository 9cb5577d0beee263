#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "qeleak/core/text.hpp"
#include "qeleak/lexical/porter.hpp"

namespace qeleak::lexical {

// English stopwords (the 33-word list used by Lucene's default English analyzer).
inline constexpr std::string_view kStopwordsVersion = "en-lucene-33/v1";
inline constexpr std::array<std::string_view, 33> kStopwords = {
    "a",    "an",    "and",   "are",  "as",    "at",   "be",   "but",  "by",   "for",  "if",
    "in",   "into",  "is",    "it",   "no",    "not",  "of",   "on",   "or",   "such", "that",
    "the",  "their", "then",  "there", "these", "they", "this", "to",   "was",  "will", "with"};

inline bool is_stopword(std::string_view token) {
  return std::binary_search(kStopwords.begin(), kStopwords.end(), token);
}

struct AnalyzerOptions {
  bool remove_stopwords = true;
  bool stem = true;

  std::string version() const {
    return std::string("lower/alnum-split/") + (remove_stopwords ? std::string(kStopwordsVersion) : "no-stop") +
           (stem ? "/porter" : "/no-stem");
  }
  bool operator==(const AnalyzerOptions&) const = default;
};

// lowercase -> split on non-alphanumerics -> drop stopwords -> Porter stem
inline std::vector<std::string> analyze(std::string_view s, const AnalyzerOptions& opts = {}) {
  std::vector<std::string> out;
  for (auto& tok : text::word_tokens(s)) {
    if (opts.remove_stopwords && is_stopword(tok)) continue;
    out.push_back(opts.stem ? porter_stem(tok) : std::move(tok));
  }
  return out;
}

}  // namespace qeleak::lexical
