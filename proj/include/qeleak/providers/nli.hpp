#pragma once

#include <cctype>
#include <optional>
#include <string>

#include "qeleak/core/prompts.hpp"
#include "qeleak/core/text.hpp"
#include "qeleak/core/types.hpp"
#include "qeleak/providers/provider.hpp"

namespace qeleak::providers {

inline std::string render_nli_prompt(const std::string& premise, const std::string& hypothesis) {
  std::string p;
  p.reserve(prompts::kNliHead.size() + premise.size() + hypothesis.size() + 16);
  p.append(prompts::kNliHead).append(premise).append(prompts::kNliMiddle).append(hypothesis).append(prompts::kNliTail);
  return p;
}

// Lowercase, strip surrounding whitespace/punctuation and an optional
// "label:" prefix, then require an exact label.
inline std::string clean_label_response(const std::string& response) {
  std::string s = text::normalize(response);
  auto strip = [](std::string& x) {
    size_t b = 0, e = x.size();
    auto junk = [](unsigned char c) { return std::isspace(c) || std::ispunct(c); };
    while (b < e && junk(x[b])) ++b;
    while (e > b && junk(x[e - 1])) --e;
    x = x.substr(b, e - b);
  };
  strip(s);
  if (s.rfind("label:", 0) == 0) {
    s = s.substr(6);
    strip(s);
  }
  return s;
}

inline std::optional<NliLabel> parse_nli_response(const std::string& response) {
  std::string s = clean_label_response(response);
  if (s == "entailment") return NliLabel::kEntailment;
  if (s == "contradiction") return NliLabel::kContradiction;
  if (s == "neutral") return NliLabel::kNeutral;
  return std::nullopt;
}

struct NliOutcome {
  NliLabel label = NliLabel::kNeutral;
  bool parse_failed = false;
};

struct JudgeParams {
  std::string model_id = "gpt-4o-mini";
  double temperature = 0.0;
  double top_p = 1.0;
  int max_tokens = 16;
};

// One re-ask on an unparseable answer, then neutral with the flag set.
inline NliOutcome nli_judge(Provider& provider, const std::string& premise, const std::string& hypothesis,
                            const JudgeParams& params = {}) {
  if (text::trim(premise).empty() || text::trim(hypothesis).empty())
    throw UsageError("nli_judge needs a nonempty premise and hypothesis");
  ChatRequest req{params.model_id, render_nli_prompt(premise, hypothesis), params.temperature, params.top_p,
                  params.max_tokens, 0};
  for (int attempt = 0; attempt < 2; ++attempt) {
    req.repeat_index = attempt;
    if (auto label = parse_nli_response(provider.chat_complete(req))) return {*label, false};
  }
  return {NliLabel::kNeutral, true};
}

}  // namespace qeleak::providers
