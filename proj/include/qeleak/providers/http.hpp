#pragma once

#include <cstdlib>
#include <memory>
#include <optional>
#include <string>

#include "httplib.h"
#include "qeleak/providers/backend.hpp"

namespace qeleak::providers {

struct BaseUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix without trailing slash

  static BaseUrl parse(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw UsageError("endpoint '" + url + "' must start with http:// or https://");
    std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw UsageError("unsupported endpoint scheme '" + scheme + "'");
    auto path_start = url.find('/', scheme_end + 3);
    BaseUrl b;
    b.origin = url.substr(0, path_start);
    if (path_start != std::string::npos) b.prefix = url.substr(path_start);
    while (!b.prefix.empty() && b.prefix.back() == '/') b.prefix.pop_back();
    if (b.origin.size() <= scheme_end + 3) throw UsageError("endpoint '" + url + "' has no host");
    return b;
  }
};

// One JSON POST/GET against an OpenAI-compatible server (or the sidecar).
class HttpJsonClient {
 public:
  explicit HttpJsonClient(const std::string& base, std::string api_key = env_api_key())
      : base_(BaseUrl::parse(base)), raw_base_(base), api_key_(std::move(api_key)) {}

  static std::string env_api_key() {
    const char* k = std::getenv("QELEAK_API_KEY");
    return k ? std::string(k) : std::string();
  }

  const std::string& base() const { return raw_base_; }

  json post(const std::string& path, const json& body) const {
    auto cli = client();
    auto res = cli.Post(base_.prefix + path, headers(), body.dump(), "application/json");
    return handle(res, "POST " + path);
  }

  json get(const std::string& path) const {
    auto cli = client();
    auto res = cli.Get(base_.prefix + path, headers());
    return handle(res, "GET " + path);
  }

 private:
  httplib::Client client() const {
    httplib::Client cli(base_.origin);
    cli.set_connection_timeout(10, 0);
    cli.set_read_timeout(300, 0);
    cli.set_write_timeout(60, 0);
    return cli;
  }

  httplib::Headers headers() const {
    httplib::Headers h;
    if (!api_key_.empty()) h.emplace("Authorization", "Bearer " + api_key_);
    return h;
  }

  json handle(const httplib::Result& res, const std::string& what) const {
    if (!res) throw TransientError(what + " to " + raw_base_ + " failed: " + httplib::to_string(res.error()));
    const int status = res->status;
    if (status == 408 || status == 429 || status >= 500)
      throw TransientError(what + " returned HTTP " + std::to_string(status), status);
    if (status < 200 || status >= 300)
      throw ProviderError(what + " returned HTTP " + std::to_string(status) + ": " + res->body.substr(0, 500), status);
    try {
      return json::parse(res->body);
    } catch (const json::exception&) {
      throw ProviderError(what + " returned a non-JSON body", status);
    }
  }

  BaseUrl base_;
  std::string raw_base_;
  std::string api_key_;
};

class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(HttpJsonClient client) : client_(std::move(client)) {}

  std::string complete(const ChatRequest& req) override {
    json body = {{"model", req.model_id},
                 {"messages", json::array({{{"role", "user"}, {"content", req.prompt}}})},
                 {"temperature", req.temperature},
                 {"top_p", req.top_p},
                 {"max_tokens", req.max_tokens}};
    json res = client_.post("/v1/chat/completions", body);
    try {
      const auto& content = res.at("choices").at(0).at("message").at("content");
      return content.is_null() ? std::string() : content.get<std::string>();
    } catch (const json::exception&) {
      throw ProviderError("chat response lacks choices[0].message.content");
    }
  }

 private:
  HttpJsonClient client_;
};

class HttpEmbeddingBackend : public EmbeddingBackend {
 public:
  explicit HttpEmbeddingBackend(HttpJsonClient client) : client_(std::move(client)) {}

  std::vector<Vector> embed(const std::string& model_id, const std::vector<std::string>& texts) override {
    json res = client_.post("/v1/embeddings", {{"model", model_id}, {"input", texts}});
    std::vector<Vector> out(texts.size());
    try {
      const auto& data = res.at("data");
      if (data.size() != texts.size())
        throw ProviderError("embeddings response has " + std::to_string(data.size()) + " vectors for " +
                            std::to_string(texts.size()) + " inputs");
      for (size_t i = 0; i < data.size(); ++i) {
        size_t slot = data[i].contains("index") ? data[i]["index"].get<size_t>() : i;
        if (slot >= out.size() || !out[slot].empty()) throw ProviderError("embeddings response has bad index");
        out[slot] = data[i].at("embedding").get<Vector>();
      }
    } catch (const json::exception&) {
      throw ProviderError("embeddings response lacks data[i].embedding");
    }
    return out;
  }

  std::optional<size_t> advertised_dim() override {
    try {
      json h = client_.get("/health");
      if (auto it = h.find("embedding_dim"); it != h.end() && it->is_number_unsigned()) return it->get<size_t>();
    } catch (const Error&) {
    }
    return std::nullopt;
  }

 private:
  HttpJsonClient client_;
};

class HttpPairScoreBackend : public PairScoreBackend {
 public:
  explicit HttpPairScoreBackend(HttpJsonClient client) : client_(std::move(client)) {}

  Matrix score(const std::string& scorer, const std::vector<std::string>& candidates,
               const std::vector<std::string>& references) override {
    json res = client_.post("/score", {{"scorer", scorer}, {"candidates", candidates}, {"references", references}});
    try {
      return res.at("matrix").get<Matrix>();
    } catch (const json::exception&) {
      throw ProviderError("score response lacks a numeric matrix");
    }
  }

 private:
  HttpJsonClient client_;
};

}  // namespace qeleak::providers
