#pragma once

// Claims and corpus files: one JSON object per line.
//   claims: {"id", "claim", "label": str|null, "evidence": [{"doc_id"} | {"text"}]}
//   corpus: {"doc_id", "title": str|null, "text"}

#include <filesystem>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qeleak/core/jsonl.hpp"
#include "qeleak/core/log.hpp"
#include "qeleak/core/types.hpp"

namespace qeleak {

struct ClaimsLoad {
  std::vector<Claim> claims;
  size_t skipped_no_evidence = 0;
};

struct CorpusLoad {
  Corpus corpus;
  size_t skipped_empty = 0;
  std::vector<std::string> warnings;
};

inline ClaimsLoad load_claims(const fs::path& path, const LabelSet& labels) {
  ClaimsLoad out;
  std::set<std::string> seen;
  for_each_json_line(path, [&](const json& obj, size_t lineno) {
    const std::string where = path.string() + ":" + std::to_string(lineno);
    Claim c;
    c.id = require_string(obj, "id", where);
    c.text = require_string(obj, "claim", where);
    if (c.id.empty()) throw DataError(where + ": empty claim id");
    if (text::trim(c.text).empty()) throw DataError(where + ": empty claim text");
    if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) throw DataError(where + ": field 'label' must be a string or null");
      auto l = labels.try_normalize(it->get<std::string>());
      if (!l) throw DataError(where + ": unknown label '" + it->get<std::string>() + "'");
      c.label = *l;
    }
    if (auto it = obj.find("evidence"); it != obj.end() && !it->is_null()) {
      if (!it->is_array()) throw DataError(where + ": field 'evidence' must be an array");
      for (const auto& ev : *it) {
        if (!ev.is_object()) throw DataError(where + ": evidence entries must be objects");
        const bool has_ref = ev.contains("doc_id"), has_text = ev.contains("text");
        if (has_ref == has_text) throw DataError(where + ": evidence entry needs exactly one of 'doc_id' or 'text'");
        try {
          c.evidence.push_back(has_ref ? Evidence::corpus_ref(require_string(ev, "doc_id", where))
                                       : Evidence::free_text(require_string(ev, "text", where)));
        } catch (const DataError& e) {
          throw DataError(where + ": " + e.what());
        }
      }
    }
    if (!seen.insert(c.id).second) throw DataError(where + ": duplicate claim id '" + c.id + "'");
    if (c.evidence.empty()) {
      ++out.skipped_no_evidence;
      return;
    }
    out.claims.push_back(std::move(c));
  });
  return out;
}

inline CorpusLoad load_corpus(const fs::path& path) {
  CorpusLoad out;
  std::vector<Document> docs;
  std::unordered_map<std::string, size_t> first_line;
  for_each_json_line(path, [&](const json& obj, size_t lineno) {
    const std::string where = path.string() + ":" + std::to_string(lineno);
    Document d;
    d.doc_id = require_string(obj, "doc_id", where);
    d.text = require_string(obj, "text", where);
    if (auto it = obj.find("title"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) throw DataError(where + ": field 'title' must be a string or null");
      d.title = it->get<std::string>();
    }
    if (auto [it, inserted] = first_line.emplace(d.doc_id, lineno); !inserted)
      throw DataError(path.string() + ": duplicate doc_id '" + d.doc_id + "' on lines " +
                      std::to_string(it->second) + " and " + std::to_string(lineno));
    if (text::trim(d.text).empty()) {
      ++out.skipped_empty;
      out.warnings.push_back(where + ": document '" + d.doc_id + "' has empty text; skipped");
      log::warn(out.warnings.back());
      return;
    }
    docs.push_back(std::move(d));
  });
  out.corpus = Corpus(std::move(docs));
  log::info("loaded " + std::to_string(out.corpus.size()) + " documents from " + path.string());
  return out;
}

struct DanglingRef {
  std::string claim_id;
  std::string doc_id;
  bool operator==(const DanglingRef&) const = default;
};

inline std::vector<DanglingRef> validate_references(const std::vector<Claim>& claims, const Corpus& corpus) {
  std::vector<DanglingRef> out;
  for (const auto& c : claims)
    for (const auto& e : c.evidence)
      if (e.is_corpus_ref() && !corpus.contains(e.doc_id())) out.push_back({c.id, e.doc_id()});
  return out;
}

inline json claim_to_json(const Claim& c) {
  json ev = json::array();
  for (const auto& e : c.evidence)
    ev.push_back(e.is_corpus_ref() ? json{{"doc_id", e.doc_id()}} : json{{"text", e.text()}});
  return json{{"id", c.id}, {"claim", c.text}, {"label", c.label ? json(*c.label) : json(nullptr)}, {"evidence", ev}};
}

inline void write_claims(const fs::path& path, const std::vector<Claim>& claims) {
  std::vector<json> rows;
  rows.reserve(claims.size());
  for (const auto& c : claims) rows.push_back(claim_to_json(c));
  write_json_lines(path, rows);
}

inline json document_to_json(const Document& d) {
  return json{{"doc_id", d.doc_id}, {"title", d.title ? json(*d.title) : json(nullptr)}, {"text", d.text}};
}

// Corpus-ref evidence resolves to the referenced document text; free text is used as is.
inline std::vector<std::string> resolve_evidence_texts(const Claim& c, const Corpus& corpus) {
  std::vector<std::string> out;
  for (const auto& e : c.evidence) {
    if (e.is_free_text()) {
      out.push_back(e.text());
    } else if (const Document* d = corpus.find(e.doc_id())) {
      out.push_back(d->text);
    } else {
      throw DataError("claim '" + c.id + "': evidence doc_id '" + e.doc_id() + "' not in corpus");
    }
  }
  return out;
}

// "id" when corpus references dominate the evidence, "text" otherwise.
enum class EvalMode { kId, kText };

inline EvalMode dominant_mode(const std::vector<Claim>& claims) {
  size_t refs = 0, texts = 0;
  for (const auto& c : claims)
    for (const auto& e : c.evidence) (e.is_corpus_ref() ? refs : texts)++;
  return refs >= texts ? EvalMode::kId : EvalMode::kText;
}

inline const char* to_string(EvalMode m) { return m == EvalMode::kId ? "id" : "text"; }

}  // namespace qeleak
