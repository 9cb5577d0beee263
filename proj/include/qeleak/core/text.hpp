#pragma once

// UTF-8 text helpers. All comparison and tokenization works on NFC-normalized,
// lowercased text; tokens are maximal runs of letters or digits.

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <string>
#include <string_view>
#include <vector>

#include "qeleak/core/error.hpp"

namespace qeleak::text {

inline icu::UnicodeString to_unicode(std::string_view s) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
}

inline std::string to_utf8(const icu::UnicodeString& u) {
  std::string out;
  u.toUTF8String(out);
  return out;
}

inline icu::UnicodeString nfc(const icu::UnicodeString& u) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw DataError("ICU NFC normalizer unavailable");
  icu::UnicodeString out = norm->normalize(u, status);
  if (U_FAILURE(status)) throw DataError("NFC normalization failed");
  return out;
}

inline std::string normalize(std::string_view s) {
  icu::UnicodeString u = nfc(to_unicode(s));
  u.toLower(icu::Locale::getRoot());
  return to_utf8(nfc(u));
}

inline bool is_word_char(UChar32 c) { return u_isalnum(c) != 0; }

// Lowercased NFC tokens split on every non-alphanumeric code point.
inline std::vector<std::string> word_tokens(std::string_view s) {
  icu::UnicodeString u = nfc(to_unicode(s));
  u.toLower(icu::Locale::getRoot());
  std::vector<std::string> out;
  icu::UnicodeString cur;
  for (int32_t i = 0; i < u.length();) {
    UChar32 c = u.char32At(i);
    if (is_word_char(c)) {
      cur.append(c);
    } else if (!cur.isEmpty()) {
      out.push_back(to_utf8(cur));
      cur.remove();
    }
    i = u.moveIndex32(i, 1);
  }
  if (!cur.isEmpty()) out.push_back(to_utf8(cur));
  return out;
}

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// Keep the first max_chars code points.
inline std::string truncate_chars(std::string_view s, size_t max_chars, bool* truncated = nullptr) {
  size_t chars = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) == 0x80) continue;
    if (chars == max_chars) {
      if (truncated) *truncated = true;
      return std::string(s.substr(0, i));
    }
    ++chars;
  }
  if (truncated) *truncated = false;
  return std::string(s);
}

}  // namespace qeleak::text
