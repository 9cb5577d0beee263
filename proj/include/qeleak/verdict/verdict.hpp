#pragma once

// Verdict prediction from a claim and its top-k evidence.

#include <algorithm>
#include <string>
#include <tuple>
#include <vector>

#include "qeleak/core/config.hpp"
#include "qeleak/core/log.hpp"
#include "qeleak/core/parallel.hpp"
#include "qeleak/core/prompts.hpp"
#include "qeleak/core/text.hpp"
#include "qeleak/core/types.hpp"
#include "qeleak/providers/nli.hpp"
#include "qeleak/providers/provider.hpp"

namespace qeleak::verdict {

struct VerdictRecord {
  std::string claim_id;
  std::string condition = "expanded";  // or "baseline"
  int repeat_index = 0;
  Label predicted;
  std::string raw_response;
  bool parse_failed = false;
  std::vector<std::string> evidence_used;
  size_t truncated_evidence = 0;

  auto order_key() const { return std::tie(condition, claim_id, repeat_index); }
};

inline std::string render_verdict_prompt(std::string_view claim, const std::vector<std::string>& evidence,
                                         const LabelSet& labels) {
  std::string p(prompts::kVerdictHead);
  p += text::join(labels.labels(), ", ");
  p += prompts::kVerdictInstruction;
  p += claim;
  p += "\n";
  for (size_t i = 0; i < evidence.size(); ++i) {
    p += "\nEvidence " + std::to_string(i + 1) + ": ";
    p += evidence[i];
  }
  p += prompts::kVerdictTail;
  return p;
}

inline std::optional<Label> parse_verdict(const std::string& response, const LabelSet& labels) {
  return labels.try_normalize(providers::clean_label_response(response));
}

struct VerdictOptions {
  providers::JudgeParams judge;
  Label fallback_label = "not enough evidence";
  size_t evidence_max_chars = 2000;
};

inline VerdictRecord predict_verdict(providers::Provider& provider, const std::string& claim_id,
                                     const std::string& claim_text, const std::vector<std::string>& evidence,
                                     const LabelSet& labels, const VerdictOptions& opts) {
  if (evidence.empty()) throw UsageError("verdict prediction for '" + claim_id + "' needs at least one evidence text");
  if (!labels.contains(opts.fallback_label))
    throw UsageError("fallback label '" + opts.fallback_label + "' is not in the label set");
  VerdictRecord rec;
  rec.claim_id = claim_id;
  for (const auto& e : evidence) {
    bool truncated = false;
    rec.evidence_used.push_back(text::truncate_chars(e, opts.evidence_max_chars, &truncated));
    rec.truncated_evidence += truncated;
  }
  if (rec.truncated_evidence)
    log::info("claim " + claim_id + ": truncated " + std::to_string(rec.truncated_evidence) + " evidence block(s) to " +
              std::to_string(opts.evidence_max_chars) + " characters");
  providers::ChatRequest req{opts.judge.model_id, render_verdict_prompt(claim_text, rec.evidence_used, labels),
                             opts.judge.temperature, opts.judge.top_p, opts.judge.max_tokens, 0};
  for (int attempt = 0; attempt < 2; ++attempt) {
    req.repeat_index = attempt;
    rec.raw_response = provider.chat_complete(req);
    if (auto label = parse_verdict(rec.raw_response, labels)) {
      rec.predicted = *label;
      return rec;
    }
  }
  rec.predicted = opts.fallback_label;
  rec.parse_failed = true;
  return rec;
}

struct VerdictTask {
  std::string claim_id;
  std::string claim_text;
  std::string condition = "expanded";
  int repeat_index = 0;
  std::vector<std::string> evidence;
};

inline std::vector<VerdictRecord> verdict_run(const std::vector<VerdictTask>& tasks, const LabelSet& labels,
                                              providers::Provider& provider, const VerdictOptions& opts,
                                              int max_in_flight = 8) {
  std::vector<VerdictRecord> out(tasks.size());
  parallel_for(tasks.size(), max_in_flight, [&](size_t i) {
    const auto& t = tasks[i];
    out[i] = predict_verdict(provider, t.claim_id, t.claim_text, t.evidence, labels, opts);
    out[i].condition = t.condition;
    out[i].repeat_index = t.repeat_index;
  });
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.order_key() < b.order_key(); });
  return out;
}

inline json to_json(const VerdictRecord& r) {
  return json{{"claim_id", r.claim_id},
              {"condition", r.condition},
              {"repeat_index", r.repeat_index},
              {"predicted", r.predicted},
              {"raw_response", r.raw_response},
              {"parse_failed", r.parse_failed},
              {"evidence_used", r.evidence_used},
              {"truncated_evidence", r.truncated_evidence}};
}

inline VerdictRecord verdict_from_json(const json& j, const std::string& where) {
  try {
    VerdictRecord r;
    r.claim_id = j.at("claim_id").get<std::string>();
    r.condition = j.at("condition").get<std::string>();
    r.repeat_index = j.at("repeat_index").get<int>();
    r.predicted = j.at("predicted").get<std::string>();
    r.raw_response = j.at("raw_response").get<std::string>();
    r.parse_failed = j.at("parse_failed").get<bool>();
    r.evidence_used = j.at("evidence_used").get<std::vector<std::string>>();
    r.truncated_evidence = j.value("truncated_evidence", size_t{0});
    return r;
  } catch (const json::exception& e) {
    throw DataError(where + ": malformed verdict record (" + e.what() + ")");
  }
}

inline void write_verdicts(const fs::path& path, const std::vector<VerdictRecord>& records) {
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(to_json(r));
  write_json_lines(path, rows);
}

inline std::vector<VerdictRecord> load_verdicts(const fs::path& path) {
  std::vector<VerdictRecord> out;
  for_each_json_line(path, [&](const json& j, size_t line) {
    out.push_back(verdict_from_json(j, path.string() + ":" + std::to_string(line)));
  });
  return out;
}

}  // namespace qeleak::verdict
