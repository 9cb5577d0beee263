#pragma once

// Exact inner-product search over corpus embeddings stored as float32 rows.

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "qeleak/core/jsonl.hpp"
#include "qeleak/core/log.hpp"
#include "qeleak/core/ranking.hpp"
#include "qeleak/core/types.hpp"
#include "qeleak/expansion/expansion.hpp"
#include "qeleak/providers/provider.hpp"

namespace qeleak::dense {

using providers::Vector;

inline constexpr int kVectorIndexFormatVersion = 1;

class VectorIndex {
 public:
  VectorIndex() = default;
  VectorIndex(std::string model_id, size_t dim) : model_id_(std::move(model_id)), dim_(dim) {
    if (dim_ == 0) throw UsageError("vector index dim must be >= 1");
  }

  void add(const std::string& doc_id, const Vector& v) {
    if (v.size() != dim_)
      throw DataError("embedding for doc '" + doc_id + "' has dim " + std::to_string(v.size()) + ", index dim is " +
                      std::to_string(dim_));
    for (double x : v)
      if (!std::isfinite(x)) throw DataError("embedding for doc '" + doc_id + "' has a non-finite value");
    if (!row_of_.emplace(doc_id, doc_ids_.size()).second) throw DataError("duplicate doc_id '" + doc_id + "' in vector index");
    doc_ids_.push_back(doc_id);
    for (double x : v) data_.push_back(static_cast<float>(x));
  }

  size_t size() const { return doc_ids_.size(); }
  size_t dim() const { return dim_; }
  const std::string& model_id() const { return model_id_; }
  const std::vector<std::string>& doc_ids() const { return doc_ids_; }
  const float* row(size_t r) const { return data_.data() + r * dim_; }

  double inner_product(size_t r, const Vector& q) const {
    const float* x = row(r);
    double s = 0.0;
    for (size_t i = 0; i < dim_; ++i) s += static_cast<double>(x[i]) * q[i];
    return s;
  }

  Ranking search(const Vector& query, int k) const {
    if (k < 1) throw UsageError("k must be >= 1");
    if (query.size() != dim_)
      throw DataError("query dim " + std::to_string(query.size()) + " does not match index dim " + std::to_string(dim_));
    Ranking all;
    all.reserve(size());
    for (size_t r = 0; r < size(); ++r) all.push_back({doc_ids_[r], inner_product(r, query)});
    return top_k(std::move(all), static_cast<size_t>(k));
  }

  std::string checksum() const {
    return providers::sha256_hex(std::string_view(reinterpret_cast<const char*>(le_bytes().data()), data_.size() * 4));
  }

  void save(const fs::path& dir) const {
    fs::create_directories(dir);
    const auto bytes = le_bytes();
    write_file_atomic(dir / "vectors.f32", std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    write_file_atomic(dir / "docids.json", json(doc_ids_).dump() + "\n");
    json manifest = {{"format_version", kVectorIndexFormatVersion},
                     {"model_id", model_id_},
                     {"dim", dim_},
                     {"count", size()},
                     {"checksum", checksum()}};
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  }

  static VectorIndex load(const fs::path& dir) {
    json m = read_json_file(dir / "manifest.json");
    try {
      if (m.at("format_version").get<int>() != kVectorIndexFormatVersion)
        throw DataError("vector index at '" + dir.string() + "' has an unsupported format version");
      VectorIndex idx(m.at("model_id").get<std::string>(), m.at("dim").get<size_t>());
      const size_t count = m.at("count").get<size_t>();
      auto ids = read_json_file(dir / "docids.json").get<std::vector<std::string>>();
      std::ifstream in(dir / "vectors.f32", std::ios::binary);
      if (!in) throw DataError("cannot open '" + (dir / "vectors.f32").string() + "'");
      std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
      if (ids.size() != count || bytes.size() != count * idx.dim_ * 4)
        throw DataError("vector index at '" + dir.string() + "' is inconsistent with its manifest");
      idx.data_.resize(count * idx.dim_);
      for (size_t i = 0; i < idx.data_.size(); ++i) {
        uint32_t u = 0;
        for (int b = 3; b >= 0; --b) u = (u << 8) | bytes[i * 4 + b];
        idx.data_[i] = std::bit_cast<float>(u);
      }
      idx.doc_ids_ = std::move(ids);
      for (size_t r = 0; r < idx.doc_ids_.size(); ++r)
        if (!idx.row_of_.emplace(idx.doc_ids_[r], r).second) throw DataError("duplicate doc_id in vector index");
      if (idx.checksum() != m.at("checksum").get<std::string>())
        throw DataError("vector index at '" + dir.string() + "' fails its checksum");
      return idx;
    } catch (const json::exception& e) {
      throw DataError("malformed vector index manifest at '" + dir.string() + "': " + e.what());
    }
  }

 private:
  std::vector<unsigned char> le_bytes() const {
    std::vector<unsigned char> out(data_.size() * 4);
    for (size_t i = 0; i < data_.size(); ++i) {
      uint32_t u = std::bit_cast<uint32_t>(data_[i]);
      for (int b = 0; b < 4; ++b) out[i * 4 + b] = static_cast<unsigned char>((u >> (8 * b)) & 0xFF);
    }
    return out;
  }

  std::string model_id_;
  size_t dim_ = 0;
  std::vector<std::string> doc_ids_;
  std::unordered_map<std::string, size_t> row_of_;
  std::vector<float> data_;
};

inline void require_model(const VectorIndex& idx, const std::string& model_id) {
  if (idx.model_id() != model_id)
    throw UsageError("vector index was built with '" + idx.model_id() + "' but the embedding model is '" + model_id +
                     "'; rebuild the index");
}

inline void require_dim(const VectorIndex& idx, providers::Provider& provider) {
  if (auto d = provider.advertised_embedding_dim(); d && *d != idx.dim())
    throw UsageError("embedding service advertises dim " + std::to_string(*d) + " but the index has dim " +
                     std::to_string(idx.dim()));
}

inline VectorIndex build_vector_index(const Corpus& corpus, providers::Provider& provider, const std::string& model_id,
                                      size_t batch_size = 32) {
  if (corpus.size() == 0) throw DataError("cannot build a vector index over an empty corpus");
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) texts.push_back(corpus[i].full_text());
  std::optional<VectorIndex> idx;
  for (size_t start = 0; start < texts.size(); start += batch_size) {
    const size_t end = std::min(texts.size(), start + batch_size);
    std::vector<std::string> batch(texts.begin() + start, texts.begin() + end);
    auto vecs = provider.embed(model_id, batch, batch_size);
    for (size_t i = 0; i < vecs.size(); ++i) {
      if (!idx) idx.emplace(model_id, vecs[i].size());
      idx->add(corpus[start + i].doc_id, vecs[i]);
    }
  }
  require_dim(*idx, provider);
  return std::move(*idx);
}

inline Ranking dense_search(const VectorIndex& idx, const Vector& query, int k) { return idx.search(query, k); }

inline Vector hyde_vector(const std::string& claim_text, const std::vector<std::string>& pseudo_docs,
                          providers::Provider& provider, const std::string& model_id) {
  std::vector<std::string> texts{claim_text};
  texts.insert(texts.end(), pseudo_docs.begin(), pseudo_docs.end());
  auto vecs = provider.embed(model_id, texts);
  std::vector<Vector> docs(vecs.begin() + 1, vecs.end());
  return expansion::hyde_query_vector(vecs[0], docs);
}

// Embeds the claim and N pseudo-documents, averages them, and searches.
inline Ranking hyde_search(const Claim& claim, const std::vector<std::string>& pseudo_docs, const VectorIndex& idx,
                           providers::Provider& provider, const std::string& model_id, int k, int N = 1) {
  require_model(idx, model_id);
  if (N < 1) throw UsageError("N must be >= 1");
  if (static_cast<int>(pseudo_docs.size()) < N)
    throw DataError("claim '" + claim.id + "' has " + std::to_string(pseudo_docs.size()) + " pseudo-documents, needs " +
                    std::to_string(N));
  std::vector<std::string> docs(pseudo_docs.begin(), pseudo_docs.begin() + N);
  return dense_search(idx, hyde_vector(claim.text, docs, provider, model_id), k);
}

}  // namespace qeleak::dense
