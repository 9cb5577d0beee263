#pragma once

// Decides whether a generated document contains a sentence entailed by gold
// evidence: segment, drop reproductions of the claim, judge every
// (evidence, sentence) pair, and call the document matched iff some pair is
// an entailment.

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qeleak/analysis/stats.hpp"
#include "qeleak/core/config.hpp"
#include "qeleak/core/jsonl.hpp"
#include "qeleak/core/log.hpp"
#include "qeleak/core/parallel.hpp"
#include "qeleak/core/types.hpp"
#include "qeleak/match/rouge.hpp"
#include "qeleak/match/segment.hpp"

namespace qeleak::match {

struct SentenceSet {
  std::string claim_id;
  int repeat_index = 0;
  std::vector<std::string> sentences;
  size_t removed_count = 0;
};

inline SentenceSet filter_reproductions(const std::vector<std::string>& sentences, std::string_view claim_text,
                                        double threshold = 0.95, RougeVariant variant = RougeVariant::kF) {
  if (threshold < 0.0 || threshold > 1.0) throw UsageError("ROUGE threshold must be in [0,1]");
  SentenceSet out;
  for (const auto& s : sentences) {
    if (text::trim(s).empty()) continue;
    if (rouge2(s, claim_text).get(variant) >= threshold) {
      ++out.removed_count;
    } else {
      out.sentences.push_back(s);
    }
  }
  return out;
}

struct NliJudgment {
  size_t evidence_index = 0;
  size_t sentence_index = 0;
  NliLabel label = NliLabel::kNeutral;
  bool parse_failed = false;
  bool operator==(const NliJudgment&) const = default;
};

struct JudgeResult {
  NliLabel label = NliLabel::kNeutral;
  bool parse_failed = false;
};

using JudgeFn = std::function<JudgeResult(const std::string& premise, const std::string& hypothesis)>;

struct MatchRecord {
  std::string claim_id;
  int repeat_index = 0;
  bool matched = false;
  std::vector<NliJudgment> judgments;
  bool empty_sentence_set = false;
  size_t removed_count = 0;
  size_t truncated_premises = 0;
};

struct MatchOptions {
  bool exhaustive = true;
  size_t premise_max_chars = 6000;
  int max_in_flight = 8;
};

inline bool any_entailment(const std::vector<NliJudgment>& js) {
  for (const auto& j : js)
    if (j.label == NliLabel::kEntailment) return true;
  return false;
}

inline MatchRecord match_document(const std::vector<std::string>& evidence, const SentenceSet& sentences,
                                  const JudgeFn& judge, const MatchOptions& opts = {}) {
  if (evidence.empty()) throw DataError("claim '" + sentences.claim_id + "' has no evidence to match against");
  MatchRecord rec;
  rec.claim_id = sentences.claim_id;
  rec.repeat_index = sentences.repeat_index;
  rec.removed_count = sentences.removed_count;
  if (sentences.sentences.empty()) {
    rec.empty_sentence_set = true;
    return rec;
  }
  std::vector<std::string> premises;
  for (const auto& e : evidence) {
    bool cut = false;
    premises.push_back(text::truncate_chars(e, opts.premise_max_chars, &cut));
    if (cut) ++rec.truncated_premises;
  }
  if (rec.truncated_premises)
    log::info("claim " + rec.claim_id + ": truncated " + std::to_string(rec.truncated_premises) +
              " premise(s) to " + std::to_string(opts.premise_max_chars) + " characters");
  const size_t m = premises.size(), n = sentences.sentences.size();
  if (opts.exhaustive) {
    rec.judgments.resize(m * n);
    parallel_for(m * n, opts.max_in_flight, [&](size_t idx) {
      const size_t i = idx / n, j = idx % n;
      JudgeResult r = judge(premises[i], sentences.sentences[j]);
      rec.judgments[idx] = {i, j, r.label, r.parse_failed};
    });
  } else {
    for (size_t i = 0; i < m && !any_entailment(rec.judgments); ++i) {
      for (size_t j = 0; j < n; ++j) {
        JudgeResult r = judge(premises[i], sentences.sentences[j]);
        rec.judgments.push_back({i, j, r.label, r.parse_failed});
        if (r.label == NliLabel::kEntailment) break;
      }
    }
  }
  rec.matched = any_entailment(rec.judgments);
  return rec;
}

inline json to_json(const MatchRecord& r) {
  json js = json::array();
  for (const auto& j : r.judgments)
    js.push_back({{"i", j.evidence_index}, {"j", j.sentence_index}, {"label", to_string(j.label)},
                  {"parse_failed", j.parse_failed}});
  return json{{"claim_id", r.claim_id},
              {"repeat_index", r.repeat_index},
              {"matched", r.matched},
              {"empty_sentence_set", r.empty_sentence_set},
              {"removed_count", r.removed_count},
              {"truncated_premises", r.truncated_premises},
              {"judgments", js}};
}

inline MatchRecord match_record_from_json(const json& j) {
  MatchRecord r;
  r.claim_id = j.at("claim_id").get<std::string>();
  r.repeat_index = j.at("repeat_index").get<int>();
  r.matched = j.at("matched").get<bool>();
  r.empty_sentence_set = j.value("empty_sentence_set", false);
  r.removed_count = j.value("removed_count", size_t{0});
  r.truncated_premises = j.value("truncated_premises", size_t{0});
  for (const auto& x : j.at("judgments"))
    r.judgments.push_back({x.at("i").get<size_t>(), x.at("j").get<size_t>(),
                           parse_nli_label(x.at("label").get<std::string>()), x.value("parse_failed", false)});
  return r;
}

struct MatchedRate {
  std::vector<double> per_repeat;  // indexed by repeat_index
  analysis::MeanSe summary;
};

// Per repeat: matched claims / claims; then mean and SE across repeats.
inline MatchedRate matched_rate(const std::vector<MatchRecord>& records) {
  std::map<int, std::pair<size_t, size_t>> counts;  // repeat -> (matched, total)
  for (const auto& r : records) {
    auto& c = counts[r.repeat_index];
    c.first += r.matched ? 1 : 0;
    ++c.second;
  }
  if (counts.empty()) throw DataError("matched_rate: no match records");
  MatchedRate out;
  for (const auto& [rep, c] : counts)
    out.per_repeat.push_back(static_cast<double>(c.first) / static_cast<double>(c.second));
  out.summary = analysis::mean_se(out.per_repeat);
  return out;
}

}  // namespace qeleak::match
