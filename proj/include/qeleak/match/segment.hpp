#pragma once

// Rule-based sentence segmentation. A boundary falls after '.', '!' or '?'
// (plus any closing quotes/brackets) when followed by whitespace and then an
// uppercase letter or digit, unless the word ending in '.' is a known
// abbreviation. Blank lines always separate sentences.

#include <unicode/uchar.h>

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "qeleak/core/text.hpp"

namespace qeleak::match {

inline constexpr std::array<std::string_view, 40> kAbbreviations = {
    "dr.",  "mr.",  "mrs.", "ms.",  "prof.", "sr.",   "jr.",  "st.",  "mt.",  "u.s.",
    "u.k.", "e.g.", "i.e.", "etc.", "vs.",   "fig.",  "figs.", "no.", "nos.", "inc.",
    "ltd.", "co.",  "corp.", "al.", "approx.", "dept.", "est.", "gen.", "gov.", "jan.",
    "feb.", "mar.", "apr.", "aug.", "sept.", "oct.",  "nov.", "dec.", "vol.", "p."};

inline bool is_abbreviation(std::string_view word) {
  std::string lower = text::normalize(word);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lower) != kAbbreviations.end();
}

namespace detail {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

inline bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

// Decodes the code point starting at s[i].
inline UChar32 code_point_at(std::string_view s, size_t i) {
  icu::UnicodeString u = text::to_unicode(s.substr(i, std::min<size_t>(4, s.size() - i)));
  return u.isEmpty() ? 0 : u.char32At(0);
}

inline void split_block(std::string_view block, std::vector<std::string>& out) {
  size_t start = 0;
  for (size_t i = 0; i < block.size(); ++i) {
    const char c = block[i];
    if (c != '.' && c != '!' && c != '?') continue;
    size_t end = i + 1;
    while (end < block.size() && is_closer(block[end])) ++end;
    size_t next = end;
    while (next < block.size() && is_space(block[next])) ++next;
    if (next == end || next >= block.size()) continue;
    UChar32 cp = code_point_at(block, next);
    if (!u_isupper(cp) && !u_isdigit(cp)) continue;
    if (c == '.') {
      size_t w = i;
      while (w > start && !is_space(block[w - 1])) --w;
      std::string_view word = block.substr(w, i + 1 - w);
      while (!word.empty() && (word.front() == '(' || word.front() == '"' || word.front() == '\''))
        word.remove_prefix(1);
      if (is_abbreviation(word)) continue;
    }
    auto sentence = text::trim(block.substr(start, end - start));
    if (!sentence.empty()) out.emplace_back(sentence);
    start = next;
    i = next - 1;
  }
  auto rest = text::trim(block.substr(start));
  if (!rest.empty()) out.emplace_back(rest);
}

}  // namespace detail

inline std::vector<std::string> segment_sentences(std::string_view text) {
  std::vector<std::string> out;
  size_t block_start = 0;
  size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '\n') {
      ++i;
      continue;
    }
    // A blank line: newline, optional horizontal whitespace, newline.
    size_t j = i + 1;
    while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
    if (j < text.size() && text[j] == '\n') {
      detail::split_block(text.substr(block_start, i - block_start), out);
      while (j < text.size() && detail::is_space(text[j])) ++j;
      block_start = j;
      i = j;
    } else {
      i = j;
    }
  }
  detail::split_block(text.substr(block_start), out);
  return out;
}

}  // namespace qeleak::match
