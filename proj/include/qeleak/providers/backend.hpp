#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qeleak/core/error.hpp"
#include "qeleak/core/jsonl.hpp"

namespace qeleak::providers {

struct ChatRequest {
  std::string model_id;
  std::string prompt;
  double temperature = 0.7;
  double top_p = 1.0;
  int max_tokens = 512;
  int repeat_index = 0;  // distinguishes sampled repeats in the cache

  void validate() const {
    if (temperature < 0.0) throw UsageError("temperature must be >= 0");
    if (max_tokens < 1) throw UsageError("max_tokens must be >= 1");
    if (repeat_index < 0) throw UsageError("repeat_index must be >= 0");
  }

  json cache_material() const {
    return json{{"kind", "chat"},          {"model", model_id},         {"prompt", prompt},
                {"temperature", temperature}, {"top_p", top_p},         {"max_tokens", max_tokens},
                {"repeat_index", repeat_index}};
  }
};

using Vector = std::vector<double>;
using Matrix = std::vector<std::vector<double>>;

// Failures worth retrying (transport errors, 408/429/5xx).
class TransientError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const ChatRequest& req) = 0;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::vector<Vector> embed(const std::string& model_id, const std::vector<std::string>& texts) = 0;
  virtual std::optional<size_t> advertised_dim() { return std::nullopt; }
};

class PairScoreBackend {
 public:
  virtual ~PairScoreBackend() = default;
  virtual Matrix score(const std::string& scorer, const std::vector<std::string>& candidates,
                       const std::vector<std::string>& references) = 0;
};

}  // namespace qeleak::providers
