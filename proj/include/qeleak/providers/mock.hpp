#pragma once

// Deterministic offline provider. Every response is a pure function of the
// seed and the request:
//  - NLI prompts: entailment iff the hypothesis content words all occur in the
//    premise (contradiction if it only adds a negation), else neutral.
//  - verdict prompts: the first listed label when the evidence covers most of
//    the claim's content words, otherwise a hashed pick among the labels.
//  - prompts containing a canned claim: texts[repeat_index % texts.size()].
//  - anything else: hashed pseudo-text.
// Embeddings are unit-normalized sums of hashed per-token vectors.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "qeleak/core/jsonl.hpp"
#include "qeleak/core/prompts.hpp"
#include "qeleak/core/text.hpp"
#include "qeleak/lexical/analyzer.hpp"
#include "qeleak/providers/backend.hpp"
#include "qeleak/providers/cache.hpp"

namespace qeleak::providers {

struct CannedGeneration {
  std::string claim;
  std::vector<std::string> texts;
};

inline std::vector<CannedGeneration> load_canned(const fs::path& path) {
  std::vector<CannedGeneration> out;
  for_each_json_line(path, [&](const json& obj, size_t line) {
    CannedGeneration g;
    g.claim = require_string(obj, "claim", path.string() + ":" + std::to_string(line));
    if (!obj.contains("texts") || !obj["texts"].is_array() || obj["texts"].empty())
      throw DataError(path.string() + ":" + std::to_string(line) + ": 'texts' must be a nonempty array");
    for (const auto& t : obj["texts"]) {
      if (!t.is_string()) throw DataError(path.string() + ":" + std::to_string(line) + ": texts must be strings");
      g.texts.push_back(t.get<std::string>());
    }
    out.push_back(std::move(g));
  });
  return out;
}

namespace detail {

inline uint64_t hash64(std::string_view s) {
  const std::string hex = sha256_hex(s);
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline double unit_interval(uint64_t& state) { return (splitmix64(state) >> 11) * 0x1.0p-53; }

inline std::set<std::string> content_set(std::string_view s) {
  auto toks = lexical::analyze(s);
  return {toks.begin(), toks.end()};
}

inline bool has_negation(const std::vector<std::string>& words) {
  static const std::set<std::string> kNeg = {"not", "no", "never", "nor", "none", "t"};
  return std::any_of(words.begin(), words.end(), [](const auto& w) { return kNeg.count(w) > 0; });
}

inline std::string between(std::string_view s, std::string_view open, std::string_view close, bool last_open = false) {
  size_t a = last_open ? s.rfind(open) : s.find(open);
  if (a == std::string_view::npos) return {};
  a += open.size();
  size_t b = close.empty() ? s.size() : s.find(close, a);
  if (b == std::string_view::npos) b = s.size();
  return std::string(s.substr(a, b - a));
}

inline constexpr std::string_view kVocabulary[] = {
    "river",   "valley",  "history", "council", "harbor",  "season",  "archive", "station", "garden",
    "record",  "signal",  "market",  "bridge",  "village", "theory",  "measure", "journal", "winter",
    "program", "figure",  "island",  "process", "network", "culture", "highway", "orchard", "lantern",
    "meadow",  "compass", "quarry",  "harvest", "gallery", "pattern", "voyage",  "canyon",  "ledger"};

}  // namespace detail

class MockBackend : public ChatBackend, public EmbeddingBackend, public PairScoreBackend {
 public:
  explicit MockBackend(uint64_t seed = 0, std::vector<CannedGeneration> canned = {}, size_t embedding_dim = 8)
      : seed_(seed), canned_(std::move(canned)), dim_(embedding_dim) {
    if (dim_ == 0) throw UsageError("mock embedding dim must be >= 1");
    std::stable_sort(canned_.begin(), canned_.end(),
                     [](const auto& a, const auto& b) { return a.claim.size() > b.claim.size(); });
  }

  std::string complete(const ChatRequest& req) override {
    ++calls_;
    const std::string_view p = req.prompt;
    if (p.starts_with(prompts::kNliHead)) return nli(p);
    if (p.starts_with(prompts::kVerdictHead)) return verdict(req);
    for (const auto& g : canned_)
      if (!g.claim.empty() && p.find(g.claim) != std::string_view::npos)
        return g.texts[static_cast<size_t>(req.repeat_index) % g.texts.size()];
    return pseudo_text(req);
  }

  std::vector<Vector> embed(const std::string& model_id, const std::vector<std::string>& texts) override {
    ++calls_;
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_one(model_id, t));
    return out;
  }

  std::optional<size_t> advertised_dim() override { return dim_; }

  // Multiset token F1, a cheap stand-in for BERTScore F.
  Matrix score(const std::string&, const std::vector<std::string>& candidates,
               const std::vector<std::string>& references) override {
    ++calls_;
    Matrix m(candidates.size(), std::vector<double>(references.size(), 0.0));
    for (size_t i = 0; i < candidates.size(); ++i)
      for (size_t j = 0; j < references.size(); ++j) m[i][j] = token_f1(candidates[i], references[j]);
    return m;
  }

  uint64_t calls() const { return calls_.load(); }

  static double token_f1(std::string_view a, std::string_view b) {
    auto ta = text::word_tokens(a), tb = text::word_tokens(b);
    if (ta.empty() && tb.empty()) return 1.0;
    if (ta.empty() || tb.empty()) return 0.0;
    std::sort(ta.begin(), ta.end());
    std::sort(tb.begin(), tb.end());
    std::vector<std::string> common;
    std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(common));
    if (common.empty()) return 0.0;
    const double p = static_cast<double>(common.size()) / ta.size();
    const double r = static_cast<double>(common.size()) / tb.size();
    return 2 * p * r / (p + r);
  }

 private:
  std::string nli(std::string_view p) const {
    const std::string body(p.substr(prompts::kNliHead.size()));
    const size_t mid = body.rfind(prompts::kNliMiddle);
    if (mid == std::string::npos) return "neutral";
    std::string premise = body.substr(0, mid);
    std::string hypothesis = body.substr(mid + prompts::kNliMiddle.size());
    if (hypothesis.ends_with(prompts::kNliTail)) hypothesis.resize(hypothesis.size() - prompts::kNliTail.size());
    const auto prem = detail::content_set(premise);
    const auto hyp = detail::content_set(hypothesis);
    if (hyp.empty()) return "neutral";
    if (!std::includes(prem.begin(), prem.end(), hyp.begin(), hyp.end())) return "neutral";
    const bool neg_h = detail::has_negation(text::word_tokens(hypothesis));
    const bool neg_p = detail::has_negation(text::word_tokens(premise));
    return neg_h != neg_p ? "contradiction" : "entailment";
  }

  std::string verdict(const ChatRequest& req) const {
    const std::string_view p = req.prompt;
    std::string labels_str = detail::between(p, prompts::kVerdictHead, prompts::kVerdictInstruction);
    std::vector<std::string> labels;
    for (size_t pos = 0; pos <= labels_str.size();) {
      size_t comma = labels_str.find(", ", pos);
      if (comma == std::string::npos) comma = labels_str.size();
      labels.push_back(labels_str.substr(pos, comma - pos));
      pos = comma + 2;
    }
    if (labels.empty() || labels.front().empty()) return "unknown";
    const std::string claim = detail::between(p, prompts::kVerdictInstruction, "\n\n");
    const size_t ev_at = p.find("\n\nEvidence 1: ");
    const std::string evidence = ev_at == std::string_view::npos ? std::string() : std::string(p.substr(ev_at));
    const auto claim_set = detail::content_set(claim);
    const auto ev_set = detail::content_set(evidence);
    size_t covered = 0;
    for (const auto& t : claim_set) covered += ev_set.count(t);
    if (!claim_set.empty() && covered * 5 >= claim_set.size() * 4) return labels.front();
    uint64_t state = detail::hash64(key_prefix("verdict", req) + req.prompt);
    return labels[detail::splitmix64(state) % labels.size()];
  }

  std::string pseudo_text(const ChatRequest& req) const {
    uint64_t state = detail::hash64(key_prefix("text", req) + req.prompt);
    constexpr size_t kVocab = std::size(detail::kVocabulary);
    std::string out;
    const size_t sentences = 2 + detail::splitmix64(state) % 3;
    for (size_t s = 0; s < sentences; ++s) {
      const size_t words = 6 + detail::splitmix64(state) % 8;
      for (size_t w = 0; w < words; ++w) {
        std::string word(detail::kVocabulary[detail::splitmix64(state) % kVocab]);
        if (w == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
        if (!out.empty()) out += ' ';
        out += word;
      }
      out += '.';
    }
    return out;
  }

  std::string key_prefix(std::string_view kind, const ChatRequest& req) const {
    return json{{"seed", seed_},       {"kind", kind},           {"model", req.model_id},
                {"t", req.temperature}, {"top_p", req.top_p},    {"max_tokens", req.max_tokens},
                {"repeat", req.repeat_index}}
        .dump();
  }

  Vector embed_one(const std::string& model_id, const std::string& text) const {
    auto tokens = lexical::analyze(text);
    if (tokens.empty()) tokens.push_back("\x01" + text);
    Vector v(dim_, 0.0);
    const std::string prefix = json{{"seed", seed_}, {"model", model_id}}.dump();
    for (const auto& tok : tokens) {
      uint64_t state = detail::hash64(prefix + tok);
      for (auto& x : v) x += 2.0 * detail::unit_interval(state) - 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      v.assign(dim_, 0.0);
      v[0] = 1.0;
      return v;
    }
    for (auto& x : v) x /= norm;
    return v;
  }

  uint64_t seed_;
  std::vector<CannedGeneration> canned_;
  size_t dim_;
  mutable std::atomic<uint64_t> calls_{0};
};

}  // namespace qeleak::providers
