#pragma once

// Precomputed pair scores keyed by (scorer, sha256(candidate), sha256(reference)),
// stored as JSON lines so a run can replay BERTScore without the sidecar.

#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "qeleak/core/jsonl.hpp"
#include "qeleak/providers/backend.hpp"
#include "qeleak/providers/cache.hpp"

namespace qeleak::providers {

class PairScoreStore {
 public:
  static PairScoreStore load(const fs::path& path) {
    PairScoreStore s;
    for_each_json_line(path, [&](const json& obj, size_t line) {
      const std::string where = path.string() + ":" + std::to_string(line);
      auto sc = obj.find("score");
      if (sc == obj.end() || !sc->is_number()) throw DataError(where + ": field 'score' must be a number");
      s.put_hashed(require_string(obj, "scorer", where), require_string(obj, "candidate_sha256", where),
                   require_string(obj, "reference_sha256", where), sc->get<double>());
    });
    return s;
  }

  void save(const fs::path& path) const {
    std::vector<json> rows;
    std::lock_guard lock(mu_);
    for (const auto& [k, v] : scores_)
      rows.push_back({{"scorer", std::get<0>(k)},
                      {"candidate_sha256", std::get<1>(k)},
                      {"reference_sha256", std::get<2>(k)},
                      {"score", v}});
    write_json_lines(path, rows);
  }

  void put(const std::string& scorer, const std::string& candidate, const std::string& reference, double score) {
    put_hashed(scorer, sha256_hex(candidate), sha256_hex(reference), score);
  }

  std::optional<double> get(const std::string& scorer, const std::string& candidate,
                            const std::string& reference) const {
    std::lock_guard lock(mu_);
    auto it = scores_.find({scorer, sha256_hex(candidate), sha256_hex(reference)});
    if (it == scores_.end()) return std::nullopt;
    return it->second;
  }

  size_t size() const {
    std::lock_guard lock(mu_);
    return scores_.size();
  }

  PairScoreStore() = default;
  PairScoreStore(PairScoreStore&& o) noexcept : scores_(std::move(o.scores_)) {}

 private:
  void put_hashed(const std::string& scorer, const std::string& c, const std::string& r, double score) {
    std::lock_guard lock(mu_);
    scores_[{scorer, c, r}] = score;
  }

  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, double> scores_;
  mutable std::mutex mu_;
};

class FixturePairScoreBackend : public PairScoreBackend {
 public:
  explicit FixturePairScoreBackend(std::shared_ptr<const PairScoreStore> store) : store_(std::move(store)) {}

  Matrix score(const std::string& scorer, const std::vector<std::string>& candidates,
               const std::vector<std::string>& references) override {
    Matrix m(candidates.size(), std::vector<double>(references.size(), 0.0));
    for (size_t i = 0; i < candidates.size(); ++i)
      for (size_t j = 0; j < references.size(); ++j) {
        auto s = store_->get(scorer, candidates[i], references[j]);
        if (!s)
          throw ProviderError("pair-score fixture has no " + scorer + " entry for candidate " +
                              sha256_hex(candidates[i]).substr(0, 12) + " / reference " +
                              sha256_hex(references[j]).substr(0, 12) +
                              "; regenerate the fixture or score with METEOR only");
        m[i][j] = *s;
      }
    return m;
  }

 private:
  std::shared_ptr<const PairScoreStore> store_;
};

// Scores through an inner backend and remembers every pair in a store.
class RecordingPairScoreBackend : public PairScoreBackend {
 public:
  RecordingPairScoreBackend(std::shared_ptr<PairScoreBackend> inner, std::shared_ptr<PairScoreStore> store)
      : inner_(std::move(inner)), store_(std::move(store)) {}

  Matrix score(const std::string& scorer, const std::vector<std::string>& candidates,
               const std::vector<std::string>& references) override {
    Matrix m = inner_->score(scorer, candidates, references);
    for (size_t i = 0; i < m.size() && i < candidates.size(); ++i)
      for (size_t j = 0; j < m[i].size() && j < references.size(); ++j)
        store_->put(scorer, candidates[i], references[j], m[i][j]);
    return m;
  }

 private:
  std::shared_ptr<PairScoreBackend> inner_;
  std::shared_ptr<PairScoreStore> store_;
};

}  // namespace qeleak::providers
