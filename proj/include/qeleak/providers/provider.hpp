#pragma once

// Cached, retrying front end over the chat / embeddings / pair-score backends.

#include <atomic>
#include <chrono>
#include <cmath>
#include <memory>
#include <thread>

#include "qeleak/core/log.hpp"
#include "qeleak/providers/backend.hpp"
#include "qeleak/providers/cache.hpp"

namespace qeleak::providers {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds base_delay{500};
};

template <typename Fn>
auto with_retry(const RetryPolicy& policy, const std::string& what, Fn&& fn) -> decltype(fn()) {
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const TransientError& e) {
      if (attempt >= policy.max_attempts)
        throw ProviderError(what + " failed after " + std::to_string(attempt) + " attempts: " + e.what(), e.status(),
                            attempt);
      auto delay = policy.base_delay * (1 << (attempt - 1));
      log::warn(what + " attempt " + std::to_string(attempt) + " failed (" + e.what() + "), retrying");
      std::this_thread::sleep_for(delay);
    }
  }
}

// Raised lazily so a run only fails when it actually needs the missing endpoint.
class UnconfiguredBackend : public ChatBackend, public EmbeddingBackend, public PairScoreBackend {
 public:
  explicit UnconfiguredBackend(std::string message) : message_(std::move(message)) {}
  std::string complete(const ChatRequest&) override { throw UsageError(message_); }
  std::vector<Vector> embed(const std::string&, const std::vector<std::string>&) override { throw UsageError(message_); }
  Matrix score(const std::string&, const std::vector<std::string>&, const std::vector<std::string>&) override {
    throw UsageError(message_);
  }

 private:
  std::string message_;
};

class Provider {
 public:
  Provider(std::shared_ptr<ChatBackend> chat, std::shared_ptr<EmbeddingBackend> embed,
           std::shared_ptr<PairScoreBackend> score, fs::path cache_dir = {}, RetryPolicy retry = {})
      : chat_(std::move(chat)),
        embed_(std::move(embed)),
        score_(std::move(score)),
        cache_(std::move(cache_dir)),
        retry_(retry) {}

  std::string chat_complete(const ChatRequest& req) {
    req.validate();
    const CacheKey key = CacheKey::of(req.cache_material());
    if (auto hit = cache_.get(key)) return decode(*hit, "text").get<std::string>();
    ++backend_calls_;
    std::string text = with_retry(retry_, "chat completion", [&] { return chat_->complete(req); });
    cache_.put(key, json{{"text", text}}.dump());
    return text;
  }

  std::vector<Vector> embed(const std::string& model_id, const std::vector<std::string>& texts,
                            size_t batch_size = 32) {
    if (texts.empty()) throw UsageError("embed needs a nonempty list of texts");
    if (batch_size == 0) batch_size = 1;
    std::vector<Vector> out(texts.size());
    std::vector<size_t> missing;
    std::vector<CacheKey> keys;
    keys.reserve(texts.size());
    for (size_t i = 0; i < texts.size(); ++i) {
      keys.push_back(CacheKey::of({{"kind", "embedding"}, {"model", model_id}, {"input", texts[i]}}));
      if (auto hit = cache_.get(keys.back())) out[i] = decode(*hit, "embedding").get<Vector>();
      else missing.push_back(i);
    }
    for (size_t start = 0; start < missing.size(); start += batch_size) {
      const size_t end = std::min(missing.size(), start + batch_size);
      std::vector<std::string> batch;
      for (size_t m = start; m < end; ++m) batch.push_back(texts[missing[m]]);
      ++backend_calls_;
      auto vecs = with_retry(retry_, "embedding", [&] { return embed_->embed(model_id, batch); });
      if (vecs.size() != batch.size()) throw ProviderError("embedding backend returned the wrong number of vectors");
      for (size_t m = start; m < end; ++m) {
        auto& v = vecs[m - start];
        check_vector(v);
        cache_.put(keys[missing[m]], json{{"embedding", v}}.dump());
        out[missing[m]] = std::move(v);
      }
    }
    const size_t dim = out.front().size();
    for (const auto& v : out)
      if (v.size() != dim)
        throw ProviderError("embedding dimension mismatch: " + std::to_string(v.size()) + " vs " + std::to_string(dim));
    return out;
  }

  Matrix score_pairs(const std::string& scorer, const std::vector<std::string>& candidates,
                     const std::vector<std::string>& references) {
    if (candidates.empty()) return {};
    if (references.empty()) return Matrix(candidates.size());
    const CacheKey key = CacheKey::of(
        {{"kind", "score"}, {"scorer", scorer}, {"candidates", candidates}, {"references", references}});
    if (auto hit = cache_.get(key)) return decode(*hit, "matrix").get<Matrix>();
    ++backend_calls_;
    Matrix m = with_retry(retry_, "pair scoring", [&] { return score_->score(scorer, candidates, references); });
    if (m.size() != candidates.size()) throw ProviderError("pair-score matrix has the wrong number of rows");
    for (const auto& row : m) {
      if (row.size() != references.size()) throw ProviderError("pair-score matrix has the wrong number of columns");
      for (double x : row)
        if (!std::isfinite(x)) throw ProviderError("pair-score matrix has a non-finite entry");
    }
    cache_.put(key, json{{"matrix", m}}.dump());
    return m;
  }

  std::optional<size_t> advertised_embedding_dim() { return embed_->advertised_dim(); }

  uint64_t backend_calls() const { return backend_calls_.load(); }
  const DiskCache& cache() const { return cache_; }

 private:
  static json decode(const std::string& raw, const char* field) {
    try {
      return json::parse(raw).at(field);
    } catch (const json::exception&) {
      throw DataError("corrupt cache entry (missing '" + std::string(field) + "')");
    }
  }

  static void check_vector(const Vector& v) {
    if (v.empty()) throw ProviderError("embedding backend returned an empty vector");
    for (double x : v)
      if (!std::isfinite(x)) throw ProviderError("embedding backend returned a non-finite value");
  }

  std::shared_ptr<ChatBackend> chat_;
  std::shared_ptr<EmbeddingBackend> embed_;
  std::shared_ptr<PairScoreBackend> score_;
  DiskCache cache_;
  RetryPolicy retry_;
  std::atomic<uint64_t> backend_calls_{0};
};

}  // namespace qeleak::providers
