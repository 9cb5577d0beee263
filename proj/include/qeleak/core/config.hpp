#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "qeleak/core/jsonl.hpp"
#include "qeleak/core/types.hpp"

namespace qeleak {

enum class Method { kQuery2doc, kHyde };

inline const char* to_string(Method m) { return m == Method::kQuery2doc ? "query2doc" : "hyde"; }

inline Method parse_method(const std::string& s) {
  if (s == "query2doc") return Method::kQuery2doc;
  if (s == "hyde") return Method::kHyde;
  throw UsageError("unknown method '" + s + "' (expected query2doc or hyde)");
}

struct GenParams {
  double temperature = 0.7;
  double top_p = 1.0;
  int max_tokens = 512;
};

struct Bm25Params {
  double k1 = 0.9;
  double b = 0.4;
};

enum class RougeVariant { kF, kP, kR };

enum class SignificanceUnit { kClaim, kRepeat };

struct Endpoints {
  std::string chat_base;        // OpenAI-compatible chat server
  std::string embeddings_base;  // defaults to chat_base
  std::string score_base;       // pair-scoring sidecar
};

struct MockOptions {
  bool enabled = false;
  std::string canned_path;  // canned generations, resolved relative to the config file
  int embedding_dim = 8;
};

struct RunConfig {
  std::string dataset = "fever";
  Method method = Method::kQuery2doc;
  std::string model_id = "gpt-4o-mini";
  std::string judge_model_id = "gpt-4o-mini";
  std::string embedding_model_id = "facebook/contriever";
  int repeats = 8;
  int k = 5;
  int n = 5;
  int N = 1;
  GenParams gen;
  double rouge_threshold = 0.95;
  RougeVariant rouge_variant = RougeVariant::kF;
  bool exhaustive = true;
  Bm25Params bm25;
  uint64_t seed = 0;
  std::string claims_path;
  std::string corpus_path;
  std::string fallback_label = "not enough evidence";
  std::vector<std::string> text_scorers = {"meteor", "bertscore"};
  std::string pair_score_fixture;  // optional precomputed BERTScore pairs
  SignificanceUnit significance_unit = SignificanceUnit::kClaim;
  size_t premise_max_chars = 6000;
  size_t evidence_max_chars = 2000;
  int max_in_flight = 8;
  int batch_size = 32;
  Endpoints endpoints;
  MockOptions mock;

  void validate() const {
    if (repeats < 1) throw UsageError("repeats must be >= 1");
    if (k < 1) throw UsageError("k must be >= 1");
    if (n < 1) throw UsageError("n must be >= 1");
    if (N < 1) throw UsageError("N must be >= 1");
    if (rouge_threshold < 0.0 || rouge_threshold > 1.0) throw UsageError("rouge_threshold must be in [0,1]");
    if (gen.temperature < 0.0) throw UsageError("temperature must be >= 0");
    if (gen.top_p < 0.0 || gen.top_p > 1.0) throw UsageError("top_p must be in [0,1]");
    if (gen.max_tokens < 1) throw UsageError("max_tokens must be >= 1");
    if (bm25.k1 < 0.0) throw UsageError("bm25.k1 must be >= 0");
    if (bm25.b < 0.0 || bm25.b > 1.0) throw UsageError("bm25.b must be in [0,1]");
    if (max_in_flight < 1) throw UsageError("max_in_flight must be >= 1");
    if (batch_size < 1) throw UsageError("batch_size must be >= 1");
    if (mock.embedding_dim < 1) throw UsageError("mock.embedding_dim must be >= 1");
    for (const auto& s : text_scorers)
      if (s != "meteor" && s != "bertscore") throw UsageError("unknown text scorer '" + s + "'");
    if (!LabelSet::for_dataset(dataset).contains(fallback_label))
      throw UsageError("fallback_label '" + fallback_label + "' is not a label of dataset " + dataset);
  }

  LabelSet label_set() const { return LabelSet::for_dataset(dataset); }
};

inline json to_json(const RunConfig& c) {
  const char* variants[] = {"f", "p", "r"};
  return json{
      {"dataset", c.dataset},
      {"method", to_string(c.method)},
      {"model_id", c.model_id},
      {"judge_model_id", c.judge_model_id},
      {"embedding_model_id", c.embedding_model_id},
      {"repeats", c.repeats},
      {"k", c.k},
      {"n", c.n},
      {"N", c.N},
      {"gen_params", {{"temperature", c.gen.temperature}, {"top_p", c.gen.top_p}, {"max_tokens", c.gen.max_tokens}}},
      {"rouge_threshold", c.rouge_threshold},
      {"rouge_variant", variants[static_cast<int>(c.rouge_variant)]},
      {"exhaustive", c.exhaustive},
      {"bm25", {{"k1", c.bm25.k1}, {"b", c.bm25.b}}},
      {"seed", c.seed},
      {"claims_path", c.claims_path},
      {"corpus_path", c.corpus_path},
      {"fallback_label", c.fallback_label},
      {"text_scorers", c.text_scorers},
      {"pair_score_fixture", c.pair_score_fixture},
      {"significance_unit", c.significance_unit == SignificanceUnit::kClaim ? "claim" : "repeat"},
      {"premise_max_chars", c.premise_max_chars},
      {"evidence_max_chars", c.evidence_max_chars},
      {"max_in_flight", c.max_in_flight},
      {"batch_size", c.batch_size},
      {"endpoints",
       {{"chat_base", c.endpoints.chat_base},
        {"embeddings_base", c.endpoints.embeddings_base},
        {"score_base", c.endpoints.score_base}}},
      {"mock",
       {{"enabled", c.mock.enabled}, {"canned_path", c.mock.canned_path}, {"embedding_dim", c.mock.embedding_dim}}},
  };
}

namespace detail {
template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end() && !it->is_null()) {
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw UsageError(std::string("config field '") + key + "' has the wrong type");
    }
  }
}
}  // namespace detail

// Relative dataset/fixture paths resolve against base_dir.
inline RunConfig config_from_json(const json& j, const fs::path& base_dir = {}) {
  if (!j.is_object()) throw UsageError("run config must be a JSON object");
  RunConfig c;
  using detail::read_opt;
  read_opt(j, "dataset", c.dataset);
  std::string method = to_string(c.method);
  read_opt(j, "method", method);
  c.method = parse_method(method);
  read_opt(j, "model_id", c.model_id);
  read_opt(j, "judge_model_id", c.judge_model_id);
  read_opt(j, "embedding_model_id", c.embedding_model_id);
  read_opt(j, "repeats", c.repeats);
  read_opt(j, "k", c.k);
  read_opt(j, "n", c.n);
  read_opt(j, "N", c.N);
  if (auto it = j.find("gen_params"); it != j.end()) {
    read_opt(*it, "temperature", c.gen.temperature);
    read_opt(*it, "top_p", c.gen.top_p);
    read_opt(*it, "max_tokens", c.gen.max_tokens);
  }
  read_opt(j, "rouge_threshold", c.rouge_threshold);
  std::string variant = "f";
  read_opt(j, "rouge_variant", variant);
  if (variant == "f") c.rouge_variant = RougeVariant::kF;
  else if (variant == "p") c.rouge_variant = RougeVariant::kP;
  else if (variant == "r") c.rouge_variant = RougeVariant::kR;
  else throw UsageError("rouge_variant must be f, p or r");
  read_opt(j, "exhaustive", c.exhaustive);
  if (auto it = j.find("bm25"); it != j.end()) {
    read_opt(*it, "k1", c.bm25.k1);
    read_opt(*it, "b", c.bm25.b);
  }
  read_opt(j, "seed", c.seed);
  read_opt(j, "claims_path", c.claims_path);
  read_opt(j, "corpus_path", c.corpus_path);
  read_opt(j, "fallback_label", c.fallback_label);
  read_opt(j, "text_scorers", c.text_scorers);
  read_opt(j, "pair_score_fixture", c.pair_score_fixture);
  std::string unit = "claim";
  read_opt(j, "significance_unit", unit);
  if (unit == "claim") c.significance_unit = SignificanceUnit::kClaim;
  else if (unit == "repeat") c.significance_unit = SignificanceUnit::kRepeat;
  else throw UsageError("significance_unit must be claim or repeat");
  read_opt(j, "premise_max_chars", c.premise_max_chars);
  read_opt(j, "evidence_max_chars", c.evidence_max_chars);
  read_opt(j, "max_in_flight", c.max_in_flight);
  read_opt(j, "batch_size", c.batch_size);
  if (auto it = j.find("endpoints"); it != j.end()) {
    read_opt(*it, "chat_base", c.endpoints.chat_base);
    read_opt(*it, "embeddings_base", c.endpoints.embeddings_base);
    read_opt(*it, "score_base", c.endpoints.score_base);
  }
  if (auto it = j.find("mock"); it != j.end()) {
    read_opt(*it, "enabled", c.mock.enabled);
    read_opt(*it, "canned_path", c.mock.canned_path);
    read_opt(*it, "embedding_dim", c.mock.embedding_dim);
  }
  auto resolve = [&](std::string& p) {
    if (!p.empty() && !base_dir.empty() && fs::path(p).is_relative()) p = (base_dir / p).lexically_normal().string();
  };
  resolve(c.claims_path);
  resolve(c.corpus_path);
  resolve(c.mock.canned_path);
  resolve(c.pair_score_fixture);
  c.validate();
  return c;
}

inline RunConfig load_config(const fs::path& path) {
  return config_from_json(read_json_file(path), fs::absolute(path).parent_path());
}

}  // namespace qeleak
