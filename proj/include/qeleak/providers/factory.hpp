#pragma once

#include <memory>

#include "qeleak/core/config.hpp"
#include "qeleak/providers/http.hpp"
#include "qeleak/providers/mock.hpp"
#include "qeleak/providers/pair_store.hpp"
#include "qeleak/providers/provider.hpp"

namespace qeleak::providers {

struct ProviderBundle {
  std::shared_ptr<Provider> provider;
  std::shared_ptr<MockBackend> mock;  // set when the mock is active
};

inline ProviderBundle make_provider(const RunConfig& cfg, const fs::path& cache_dir, RetryPolicy retry = {}) {
  ProviderBundle out;
  std::shared_ptr<ChatBackend> chat;
  std::shared_ptr<EmbeddingBackend> embed;
  std::shared_ptr<PairScoreBackend> score;
  if (cfg.mock.enabled) {
    std::vector<CannedGeneration> canned;
    if (!cfg.mock.canned_path.empty()) canned = load_canned(cfg.mock.canned_path);
    out.mock = std::make_shared<MockBackend>(cfg.seed, std::move(canned), static_cast<size_t>(cfg.mock.embedding_dim));
    chat = out.mock;
    embed = out.mock;
    score = out.mock;
  } else {
    if (cfg.endpoints.chat_base.empty()) {
      chat = std::make_shared<UnconfiguredBackend>("no chat endpoint: set endpoints.chat_base or use --mock");
    } else {
      chat = std::make_shared<HttpChatBackend>(HttpJsonClient(cfg.endpoints.chat_base));
    }
    const std::string& eb =
        cfg.endpoints.embeddings_base.empty() ? cfg.endpoints.chat_base : cfg.endpoints.embeddings_base;
    if (eb.empty()) {
      embed = std::make_shared<UnconfiguredBackend>("no embeddings endpoint: set endpoints.embeddings_base or use --mock");
    } else {
      embed = std::make_shared<HttpEmbeddingBackend>(HttpJsonClient(eb));
    }
    if (cfg.endpoints.score_base.empty()) {
      score = std::make_shared<UnconfiguredBackend>(
          "bertscore needs a pair-scoring endpoint: set endpoints.score_base, provide pair_score_fixture, "
          "or drop bertscore from text_scorers to use METEOR only");
    } else {
      score = std::make_shared<HttpPairScoreBackend>(HttpJsonClient(cfg.endpoints.score_base));
    }
  }
  if (!cfg.pair_score_fixture.empty()) {
    auto store = std::make_shared<PairScoreStore>(PairScoreStore::load(cfg.pair_score_fixture));
    score = std::make_shared<FixturePairScoreBackend>(std::move(store));
  }
  out.provider = std::make_shared<Provider>(chat, embed, score, cache_dir, retry);
  return out;
}

}  // namespace qeleak::providers
