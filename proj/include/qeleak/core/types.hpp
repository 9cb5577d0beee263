#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "qeleak/core/error.hpp"
#include "qeleak/core/text.hpp"

namespace qeleak {

struct CorpusRef {
  std::string doc_id;
  bool operator==(const CorpusRef&) const = default;
};

struct FreeText {
  std::string text;
  bool operator==(const FreeText&) const = default;
};

// Gold evidence: either a pointer into the corpus or annotator-written text.
class Evidence {
 public:
  static Evidence corpus_ref(std::string doc_id) {
    if (doc_id.empty()) throw DataError("evidence doc_id is empty");
    return Evidence(CorpusRef{std::move(doc_id)});
  }
  static Evidence free_text(std::string text) {
    if (text::trim(text).empty()) throw DataError("free-text evidence is empty");
    return Evidence(FreeText{std::move(text)});
  }

  bool is_corpus_ref() const { return std::holds_alternative<CorpusRef>(value_); }
  bool is_free_text() const { return std::holds_alternative<FreeText>(value_); }
  const std::string& doc_id() const { return std::get<CorpusRef>(value_).doc_id; }
  const std::string& text() const { return std::get<FreeText>(value_).text; }

  bool operator==(const Evidence&) const = default;

 private:
  explicit Evidence(std::variant<CorpusRef, FreeText> v) : value_(std::move(v)) {}
  std::variant<CorpusRef, FreeText> value_;
};

using Label = std::string;  // canonical label name

enum class NliLabel { kEntailment, kContradiction, kNeutral };

inline const char* to_string(NliLabel l) {
  switch (l) {
    case NliLabel::kEntailment: return "entailment";
    case NliLabel::kContradiction: return "contradiction";
    default: return "neutral";
  }
}

inline NliLabel parse_nli_label(const std::string& s) {
  if (s == "entailment") return NliLabel::kEntailment;
  if (s == "contradiction") return NliLabel::kContradiction;
  if (s == "neutral") return NliLabel::kNeutral;
  throw DataError("unknown NLI label '" + s + "'");
}

struct Claim {
  std::string id;
  std::string text;
  std::optional<Label> label;
  std::vector<Evidence> evidence;

  bool operator==(const Claim&) const = default;
};

struct Document {
  std::string doc_id;
  std::optional<std::string> title;
  std::string text;

  // Title prepended to body, separated by a newline.
  std::string full_text() const { return title && !title->empty() ? *title + "\n" + text : text; }
};

// Id-addressable, immutable after construction.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> docs) : docs_(std::move(docs)) {
    index_.reserve(docs_.size());
    for (size_t i = 0; i < docs_.size(); ++i) {
      if (!index_.emplace(docs_[i].doc_id, i).second)
        throw DataError("duplicate doc_id '" + docs_[i].doc_id + "'");
    }
  }

  size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const std::vector<Document>& documents() const { return docs_; }
  const Document& operator[](size_t ordinal) const { return docs_[ordinal]; }

  const Document* find(const std::string& doc_id) const {
    auto it = index_.find(doc_id);
    return it == index_.end() ? nullptr : &docs_[it->second];
  }
  bool contains(const std::string& doc_id) const { return index_.count(doc_id) != 0; }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, size_t> index_;
};

// Ordered canonical labels with a case-insensitive alias table.
class LabelSet {
 public:
  LabelSet() = default;
  LabelSet(std::vector<Label> canonical, const std::map<std::string, Label>& aliases = {})
      : canonical_(std::move(canonical)) {
    for (size_t i = 0; i < canonical_.size(); ++i) {
      for (size_t j = 0; j < i; ++j)
        if (canonical_[i] == canonical_[j]) throw DataError("duplicate canonical label '" + canonical_[i] + "'");
      add_alias(canonical_[i], canonical_[i]);
    }
    for (const auto& [alias, target] : aliases) add_alias(alias, target);
  }

  static LabelSet for_dataset(const std::string& name) {
    const std::vector<Label> three = {"supported", "refuted", "not enough evidence"};
    if (name == "fever")
      return LabelSet(three, {{"SUPPORTS", "supported"},
                              {"REFUTES", "refuted"},
                              {"NOT ENOUGH INFO", "not enough evidence"},
                              {"NEI", "not enough evidence"}});
    if (name == "scifact")
      return LabelSet(three, {{"SUPPORT", "supported"},
                              {"CONTRADICT", "refuted"},
                              {"NOINFO", "not enough evidence"},
                              {"NOT ENOUGH INFO", "not enough evidence"}});
    if (name == "averitec")
      return LabelSet({"supported", "refuted", "not enough evidence", "conflicting evidence"},
                      {{"Conflicting Evidence/Cherrypicking", "conflicting evidence"},
                       {"cherrypicking", "conflicting evidence"}});
    throw UsageError("unknown dataset '" + name + "' (expected fever, scifact or averitec)");
  }

  const std::vector<Label>& labels() const { return canonical_; }
  size_t size() const { return canonical_.size(); }
  bool contains(const Label& l) const {
    return std::find(canonical_.begin(), canonical_.end(), l) != canonical_.end();
  }

  std::optional<Label> try_normalize(std::string_view raw) const {
    auto it = alias_.find(key(raw));
    if (it == alias_.end()) return std::nullopt;
    return it->second;
  }

  Label normalize(std::string_view raw) const {
    auto l = try_normalize(raw);
    if (!l) throw DataError("unknown label '" + std::string(raw) + "'");
    return *l;
  }

  const std::map<std::string, Label>& alias_table() const { return alias_; }

 private:
  static std::string key(std::string_view raw) { return text::normalize(text::trim(raw)); }

  void add_alias(const std::string& alias, const Label& target) {
    if (!contains(target)) throw DataError("alias '" + alias + "' targets unknown label '" + target + "'");
    auto [it, inserted] = alias_.emplace(key(alias), target);
    if (!inserted && it->second != target)
      throw DataError("alias '" + alias + "' maps to both '" + it->second + "' and '" + target + "'");
  }

  std::vector<Label> canonical_;
  std::map<std::string, Label> alias_;
};

}  // namespace qeleak
