#pragma once

// In-memory BM25 inverted index.
//
//   score(d) = sum over query tokens t of
//              idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len(d) / avglen))
//   idf(t)   = ln(1 + (N - df + 0.5) / (df + 0.5))
//
// Repeated query tokens contribute once per occurrence. Titles are indexed
// together with the body text.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "qeleak/core/config.hpp"
#include "qeleak/core/jsonl.hpp"
#include "qeleak/core/ranking.hpp"
#include "qeleak/core/types.hpp"
#include "qeleak/lexical/analyzer.hpp"

namespace qeleak::lexical {

struct Posting {
  uint32_t doc = 0;  // ordinal
  uint32_t tf = 0;
  bool operator==(const Posting&) const = default;
};

inline constexpr int kIndexFormatVersion = 1;

class Bm25Index {
 public:
  static Bm25Index build(const Corpus& corpus, Bm25Params params = {}, AnalyzerOptions analyzer = {}) {
    if (corpus.empty()) throw DataError("cannot index an empty corpus");
    if (params.k1 < 0.0 || params.b < 0.0 || params.b > 1.0) throw UsageError("invalid BM25 parameters");
    Bm25Index idx;
    idx.params_ = params;
    idx.analyzer_ = analyzer;
    idx.doc_ids_.reserve(corpus.size());
    idx.doc_len_.reserve(corpus.size());
    std::unordered_map<uint32_t, uint32_t> tf;
    for (size_t ord = 0; ord < corpus.size(); ++ord) {
      const Document& d = corpus[ord];
      tf.clear();
      auto tokens = analyze(d.full_text(), analyzer);
      std::vector<uint32_t> order;
      for (const auto& tok : tokens) {
        auto [it, inserted] = idx.term_ids_.emplace(tok, static_cast<uint32_t>(idx.terms_.size()));
        if (inserted) {
          idx.terms_.push_back(tok);
          idx.postings_.emplace_back();
        }
        if (tf[it->second]++ == 0) order.push_back(it->second);
      }
      for (uint32_t term : order) idx.postings_[term].push_back({static_cast<uint32_t>(ord), tf[term]});
      idx.doc_ids_.push_back(d.doc_id);
      idx.doc_len_.push_back(static_cast<uint32_t>(tokens.size()));
      idx.total_len_ += tokens.size();
    }
    idx.finish();
    return idx;
  }

  size_t doc_count() const { return doc_ids_.size(); }
  size_t term_count() const { return terms_.size(); }
  double avg_doc_length() const { return avgdl_; }
  uint64_t total_length() const { return total_len_; }
  const Bm25Params& params() const { return params_; }
  const AnalyzerOptions& analyzer() const { return analyzer_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  uint32_t doc_length(size_t ordinal) const { return doc_len_[ordinal]; }

  const std::vector<Posting>* postings(const std::string& term) const {
    auto it = term_ids_.find(term);
    return it == term_ids_.end() ? nullptr : &postings_[it->second];
  }

  double idf(size_t df) const {
    const double n = static_cast<double>(doc_ids_.size());
    const double dfd = static_cast<double>(df);
    return std::log(1.0 + (n - dfd + 0.5) / (dfd + 0.5));
  }

  Ranking search(std::string_view query, size_t k) const {
    if (k < 1) throw UsageError("k must be >= 1");
    std::vector<double> acc(doc_ids_.size(), 0.0);
    std::vector<uint8_t> touched(doc_ids_.size(), 0);
    std::vector<uint32_t> hits;
    const double k1 = params_.k1, b = params_.b;
    for (const auto& tok : analyze(query, analyzer_)) {
      const auto* plist = postings(tok);
      if (!plist) continue;
      const double w = idf(plist->size());
      for (const Posting& p : *plist) {
        const double tf = p.tf;
        const double len = doc_len_[p.doc];
        acc[p.doc] += w * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * len / avgdl_));
        if (!touched[p.doc]) {
          touched[p.doc] = 1;
          hits.push_back(p.doc);
        }
      }
    }
    Ranking cands;
    cands.reserve(hits.size());
    for (uint32_t d : hits) cands.push_back({doc_ids_[d], acc[d]});
    return top_k(std::move(cands), k);
  }

  void save(const fs::path& dir) const {
    fs::create_directories(dir);
    std::string buf;
    for (size_t t = 0; t < terms_.size(); ++t) {
      put_varint(buf, terms_[t].size());
      buf += terms_[t];
      put_varint(buf, postings_[t].size());
      uint32_t prev = 0;
      for (const Posting& p : postings_[t]) {
        put_varint(buf, p.doc - prev);
        put_varint(buf, p.tf);
        prev = p.doc;
      }
    }
    write_file_atomic(dir / "postings.bin", buf);
    buf.clear();
    for (uint32_t len : doc_len_) put_varint(buf, len);
    write_file_atomic(dir / "doclens.bin", buf);
    write_file_atomic(dir / "docids.json", json(doc_ids_).dump());
    json manifest = {{"format_version", kIndexFormatVersion},
                     {"analyzer_version", analyzer_.version()},
                     {"k1", params_.k1},
                     {"b", params_.b},
                     {"doc_count", doc_ids_.size()},
                     {"term_count", terms_.size()},
                     {"total_length", total_len_}};
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  }

  static Bm25Index load(const fs::path& dir, const AnalyzerOptions& analyzer = {}) {
    json m = read_json_file(dir / "manifest.json");
    if (m.value("format_version", -1) != kIndexFormatVersion)
      throw DataError("BM25 index at '" + dir.string() + "' has unsupported format version");
    if (m.value("analyzer_version", std::string()) != analyzer.version())
      throw DataError("BM25 index at '" + dir.string() + "' was built with analyzer '" +
                      m.value("analyzer_version", std::string()) + "', expected '" + analyzer.version() + "'");
    Bm25Index idx;
    idx.analyzer_ = analyzer;
    idx.params_ = {m.at("k1").get<double>(), m.at("b").get<double>()};
    idx.doc_ids_ = read_json_file(dir / "docids.json").get<std::vector<std::string>>();
    const std::string lens = read_binary(dir / "doclens.bin");
    size_t pos = 0;
    while (pos < lens.size()) {
      idx.doc_len_.push_back(static_cast<uint32_t>(get_varint(lens, pos)));
    }
    const std::string post = read_binary(dir / "postings.bin");
    pos = 0;
    while (pos < post.size()) {
      size_t tlen = get_varint(post, pos);
      if (pos + tlen > post.size()) throw DataError("truncated postings file");
      std::string term = post.substr(pos, tlen);
      pos += tlen;
      size_t df = get_varint(post, pos);
      std::vector<Posting> plist(df);
      uint32_t prev = 0;
      for (auto& p : plist) {
        p.doc = prev + static_cast<uint32_t>(get_varint(post, pos));
        p.tf = static_cast<uint32_t>(get_varint(post, pos));
        prev = p.doc;
      }
      idx.term_ids_.emplace(term, static_cast<uint32_t>(idx.terms_.size()));
      idx.terms_.push_back(std::move(term));
      idx.postings_.push_back(std::move(plist));
    }
    for (uint32_t len : idx.doc_len_) idx.total_len_ += len;
    if (idx.doc_len_.size() != idx.doc_ids_.size() || idx.doc_ids_.size() != m.at("doc_count").get<size_t>() ||
        idx.terms_.size() != m.at("term_count").get<size_t>() || idx.total_len_ != m.at("total_length").get<uint64_t>())
      throw DataError("BM25 index at '" + dir.string() + "' is inconsistent with its manifest");
    idx.finish();
    return idx;
  }

 private:
  void finish() {
    avgdl_ = static_cast<double>(total_len_) / static_cast<double>(doc_ids_.size());
    // All-stopword corpora have avgdl 0; any positive value yields the same
    // (empty) result since nothing is indexed.
    if (avgdl_ == 0.0) avgdl_ = 1.0;
  }

  static void put_varint(std::string& out, uint64_t v) {
    while (v >= 0x80) {
      out.push_back(static_cast<char>((v & 0x7F) | 0x80));
      v >>= 7;
    }
    out.push_back(static_cast<char>(v));
  }

  static uint64_t get_varint(const std::string& in, size_t& pos) {
    uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      if (pos >= in.size()) throw DataError("truncated varint in index file");
      auto byte = static_cast<unsigned char>(in[pos++]);
      v |= static_cast<uint64_t>(byte & 0x7F) << shift;
      if (!(byte & 0x80)) return v;
    }
    throw DataError("malformed varint in index file");
  }

  static std::string read_binary(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot open '" + p.string() + "'");
    return std::string(std::istreambuf_iterator<char>(in), {});
  }

  Bm25Params params_;
  AnalyzerOptions analyzer_;
  std::unordered_map<std::string, uint32_t> term_ids_;
  std::vector<std::string> terms_;
  std::vector<std::vector<Posting>> postings_;
  std::vector<std::string> doc_ids_;
  std::vector<uint32_t> doc_len_;
  uint64_t total_len_ = 0;
  double avgdl_ = 0.0;
};

}  // namespace qeleak::lexical
