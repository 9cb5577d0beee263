#pragma once

// Query expansion: Query2doc text concatenation and HyDE vector averaging,
// plus the repeated pseudo-document generation that feeds both.

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
#include "qeleak/providers/provider.hpp"

namespace qeleak::expansion {

using providers::Vector;

class PromptTemplate {
 public:
  PromptTemplate(std::string prompt_id, std::string tmpl) : id_(std::move(prompt_id)), tmpl_(std::move(tmpl)) {
    const size_t first = tmpl_.find(prompts::kClaimSlot);
    if (first == std::string::npos) throw UsageError("prompt template '" + id_ + "' has no {CLAIM} slot");
    if (tmpl_.find(prompts::kClaimSlot, first + 1) != std::string::npos)
      throw UsageError("prompt template '" + id_ + "' has more than one {CLAIM} slot");
    slot_ = first;
  }

  const std::string& id() const { return id_; }
  const std::string& text() const { return tmpl_; }

  std::string render(std::string_view claim_text) const {
    std::string out;
    out.reserve(tmpl_.size() + claim_text.size());
    out.append(tmpl_, 0, slot_).append(claim_text).append(tmpl_, slot_ + prompts::kClaimSlot.size());
    return out;
  }

 private:
  std::string id_;
  std::string tmpl_;
  size_t slot_ = 0;
};

inline std::string render_prompt(const PromptTemplate& t, const Claim& claim) { return t.render(claim.text); }

inline PromptTemplate prompt_for(const std::string& dataset, Method method) {
  if (method == Method::kQuery2doc) return {"query2doc", std::string(prompts::kQuery2doc)};
  if (dataset == "fever") return {"hyde-fever", std::string(prompts::kHydeFever)};
  if (dataset == "scifact") return {"hyde-scifact", std::string(prompts::kHydeScifact)};
  if (dataset == "averitec") return {"hyde-averitec", std::string(prompts::kHydeAveritec)};
  throw UsageError("no HyDE prompt for dataset '" + dataset + "'");
}

// The claim repeated n times followed by the pseudo-document, single-space joined.
inline std::string expand_query2doc(std::string_view claim_text, std::string_view pseudo_doc, int n = 5) {
  if (n < 1) throw UsageError("query2doc n must be >= 1");
  if (claim_text.empty()) throw UsageError("query2doc needs a nonempty claim");
  if (pseudo_doc.empty()) throw UsageError("query2doc needs a nonempty pseudo-document");
  std::string out;
  out.reserve((claim_text.size() + 1) * n + pseudo_doc.size());
  for (int i = 0; i < n; ++i) out.append(claim_text).push_back(' ');
  out.append(pseudo_doc);
  return out;
}

// v = 1/(N+1) * sum_k (g(d_k) + g(q)), summed in the printed order.
inline Vector hyde_query_vector(const Vector& q, const std::vector<Vector>& docs) {
  if (docs.empty()) throw UsageError("HyDE needs at least one pseudo-document vector");
  const size_t dim = q.size();
  if (dim == 0) throw UsageError("HyDE query vector is empty");
  for (const auto& d : docs)
    if (d.size() != dim)
      throw DataError("HyDE dimension mismatch: " + std::to_string(d.size()) + " vs " + std::to_string(dim));
  Vector sum(dim, 0.0);
  for (const auto& d : docs)
    for (size_t i = 0; i < dim; ++i) sum[i] += d[i] + q[i];
  const double scale = 1.0 / static_cast<double>(docs.size() + 1);
  for (auto& x : sum) x *= scale;
  return sum;
}

struct GenerationRecord {
  std::string claim_id;
  Method method = Method::kQuery2doc;
  std::string model_id;
  int repeat_index = 0;
  int sample_index = 0;  // HyDE draws N documents per repeat
  std::string prompt_id;
  std::string text;
  GenParams params;
  bool generation_failed = false;
  std::string error;

  auto order_key() const { return std::tie(claim_id, repeat_index, sample_index); }
};

inline json to_json(const GenerationRecord& r) {
  json j = {{"claim_id", r.claim_id},
            {"method", to_string(r.method)},
            {"model_id", r.model_id},
            {"repeat_index", r.repeat_index},
            {"sample_index", r.sample_index},
            {"prompt_id", r.prompt_id},
            {"text", r.text},
            {"params", {{"temperature", r.params.temperature}, {"top_p", r.params.top_p}, {"max_tokens", r.params.max_tokens}}},
            {"generation_failed", r.generation_failed}};
  if (r.generation_failed) j["error"] = r.error;
  return j;
}

inline GenerationRecord generation_from_json(const json& j, const std::string& where) {
  try {
    GenerationRecord r;
    r.claim_id = j.at("claim_id").get<std::string>();
    r.method = parse_method(j.at("method").get<std::string>());
    r.model_id = j.at("model_id").get<std::string>();
    r.repeat_index = j.at("repeat_index").get<int>();
    r.sample_index = j.value("sample_index", 0);
    r.prompt_id = j.at("prompt_id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    const auto& p = j.at("params");
    r.params = {p.at("temperature").get<double>(), p.at("top_p").get<double>(), p.at("max_tokens").get<int>()};
    r.generation_failed = j.value("generation_failed", false);
    r.error = j.value("error", "");
    if (r.text.empty() && !r.generation_failed) throw DataError(where + ": empty text without generation_failed");
    return r;
  } catch (const json::exception& e) {
    throw DataError(where + ": malformed generation record (" + e.what() + ")");
  }
}

inline void write_generations(const fs::path& path, const std::vector<GenerationRecord>& records) {
  std::vector<json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(to_json(r));
  write_json_lines(path, rows);
}

inline std::vector<GenerationRecord> load_generations(const fs::path& path) {
  std::vector<GenerationRecord> out;
  for_each_json_line(path, [&](const json& j, size_t line) {
    out.push_back(generation_from_json(j, path.string() + ":" + std::to_string(line)));
  });
  return out;
}

struct GenerationRun {
  std::vector<GenerationRecord> records;
  size_t failed = 0;
};

// R repeats (times N documents for HyDE) per claim. Provider failures are
// recorded on the record, never dropped; successful responses are cached so a
// rerun only repeats the failures.
inline GenerationRun generate_all(const std::vector<Claim>& claims, const RunConfig& cfg,
                                  providers::Provider& provider) {
  const PromptTemplate tmpl = prompt_for(cfg.dataset, cfg.method);
  const int per_repeat = cfg.method == Method::kHyde ? cfg.N : 1;
  if (cfg.method == Method::kHyde && cfg.N > 1)
    log::warn("HyDE with N=" + std::to_string(cfg.N) +
              ": the averaging formula weights the query N/(N+1), not as an equal-weight mean");
  GenerationRun run;
  run.records.resize(claims.size() * cfg.repeats * per_repeat);
  for (size_t c = 0; c < claims.size(); ++c)
    for (int r = 0; r < cfg.repeats; ++r)
      for (int s = 0; s < per_repeat; ++s) {
        auto& rec = run.records[(c * cfg.repeats + r) * per_repeat + s];
        rec.claim_id = claims[c].id;
        rec.method = cfg.method;
        rec.model_id = cfg.model_id;
        rec.repeat_index = r;
        rec.sample_index = s;
        rec.prompt_id = tmpl.id();
        rec.params = cfg.gen;
      }
  parallel_for(run.records.size(), cfg.max_in_flight, [&](size_t i) {
    auto& rec = run.records[i];
    const Claim& claim = claims[i / (cfg.repeats * per_repeat)];
    providers::ChatRequest req{cfg.model_id, tmpl.render(claim.text), cfg.gen.temperature, cfg.gen.top_p,
                               cfg.gen.max_tokens, rec.repeat_index * per_repeat + rec.sample_index};
    try {
      rec.text = provider.chat_complete(req);
      if (text::trim(rec.text).empty()) {
        rec.text.clear();
        rec.generation_failed = true;
        rec.error = "empty generation";
      }
    } catch (const ProviderError& e) {
      rec.generation_failed = true;
      rec.error = e.what();
    }
  });
  std::sort(run.records.begin(), run.records.end(),
            [](const auto& a, const auto& b) { return a.order_key() < b.order_key(); });
  for (const auto& r : run.records) run.failed += r.generation_failed;
  return run;
}

}  // namespace qeleak::expansion
