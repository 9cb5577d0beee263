#pragma once

// Resumable pipeline over a run directory. Every stage reads the flat files
// written by earlier stages and writes its own; the manifest records which
// stages are complete under which config.

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "qeleak/analysis/report.hpp"
#include "qeleak/core/config.hpp"
#include "qeleak/core/dataset.hpp"
#include "qeleak/core/log.hpp"
#include "qeleak/core/parallel.hpp"
#include "qeleak/dense/vector_index.hpp"
#include "qeleak/expansion/expansion.hpp"
#include "qeleak/lexical/bm25_index.hpp"
#include "qeleak/match/matcher.hpp"
#include "qeleak/metrics/evidence_score.hpp"
#include "qeleak/metrics/ranking_metrics.hpp"
#include "qeleak/pipeline/manifest.hpp"
#include "qeleak/providers/factory.hpp"
#include "qeleak/providers/nli.hpp"
#include "qeleak/verdict/verdict.hpp"

namespace qeleak::pipeline {

inline constexpr const char* kBaseline = "baseline";
inline constexpr const char* kExpanded = "expanded";

struct RunOptions {
  fs::path run_dir;
  fs::path cache_dir;  // empty: run_dir/cache
  bool force = false;
  providers::RetryPolicy retry;
};

struct RankingRecord {
  std::string claim_id;
  std::string condition;
  int repeat_index = 0;
  Ranking hits;

  auto order_key() const { return std::tie(condition, claim_id, repeat_index); }
};

inline json to_json(const RankingRecord& r) {
  json hits = json::array();
  for (const auto& h : r.hits) hits.push_back({{"doc_id", h.doc_id}, {"score", h.score}});
  return json{{"claim_id", r.claim_id}, {"condition", r.condition}, {"repeat_index", r.repeat_index}, {"hits", hits}};
}

inline RankingRecord ranking_from_json(const json& j, const std::string& where) {
  try {
    RankingRecord r;
    r.claim_id = j.at("claim_id").get<std::string>();
    r.condition = j.at("condition").get<std::string>();
    r.repeat_index = j.at("repeat_index").get<int>();
    for (const auto& h : j.at("hits")) r.hits.push_back({h.at("doc_id").get<std::string>(), h.at("score").get<double>()});
    return r;
  } catch (const json::exception& e) {
    throw DataError(where + ": malformed ranking record (" + e.what() + ")");
  }
}

template <typename T, typename Parse>
std::vector<T> load_records(const fs::path& path, Parse parse) {
  std::vector<T> out;
  for_each_json_line(path, [&](const json& j, size_t line) { out.push_back(parse(j, path.string() + ":" + std::to_string(line))); });
  return out;
}

// Reads and writes stage artifacts under one run directory.
class Pipeline {
 public:
  Pipeline(RunConfig cfg, RunOptions opts) : cfg_(std::move(cfg)), opts_(std::move(opts)) {
    if (opts_.run_dir.empty()) throw UsageError("a run directory is required");
    if (opts_.cache_dir.empty()) opts_.cache_dir = opts_.run_dir / "cache";
  }

  const RunConfig& config() const { return cfg_; }
  const fs::path& run_dir() const { return opts_.run_dir; }

  // Backend calls made by this process (cache hits excluded).
  uint64_t provider_calls() const { return bundle_.provider ? bundle_.provider->backend_calls() : 0; }

  // Runs one stage; returns false when it was already complete and skipped.
  bool run_stage(const std::string& stage) {
    stage_index(stage);
    RunLock lock(opts_.run_dir);
    return run_locked(stage);
  }

  void run_all() {
    RunLock lock(opts_.run_dir);
    for (const char* s : kStages) run_locked(s);
  }

  fs::path path(const std::string& name) const { return opts_.run_dir / name; }

 private:
  bool run_locked(const std::string& stage) {
    Manifest m = Manifest::exists(opts_.run_dir) ? Manifest::load(opts_.run_dir) : Manifest::fresh(cfg_);
    const bool drift = m.hash() != config_hash(cfg_);
    if (drift) {
      if (!opts_.force)
        throw UsageError("config differs from the one recorded in " + Manifest::path_in(opts_.run_dir).string() +
                         "; rerun with --force to invalidate stage '" + stage + "' and everything after it");
      log::warn("config changed; invalidating stage '" + stage + "' and later stages");
      m.set_config(cfg_);
      m.invalidate_from(stage);
    }
    if (auto missing = m.missing_prerequisites(stage); !missing.empty())
      throw UsageError("stage '" + stage + "' needs earlier stages first: " + text::join(missing, ", "));
    if (m.complete(stage) && !opts_.force) {
      log::info("stage '" + stage + "' already complete; nothing to do");
      return false;
    }
    m.invalidate_from(stage);
    m.save(opts_.run_dir);
    std::vector<std::string> outputs = dispatch(stage);
    m.mark_complete(stage, std::move(outputs));
    m.save(opts_.run_dir);
    log::info("stage '" + stage + "' complete");
    return true;
  }

  std::vector<std::string> dispatch(const std::string& s) {
    if (s == "ingest") return ingest();
    if (s == "index") return index();
    if (s == "expand") return expand();
    if (s == "retrieve") return retrieve();
    if (s == "match") return match();
    if (s == "verdict") return verdict();
    return report();
  }

  providers::Provider& provider() {
    if (!bundle_.provider) bundle_ = providers::make_provider(cfg_, opts_.cache_dir, opts_.retry);
    return *bundle_.provider;
  }

  const Corpus& corpus() {
    if (!corpus_) corpus_ = load_corpus(cfg_.corpus_path).corpus;
    return *corpus_;
  }

  std::vector<Claim> claims() const {
    return load_claims(path("claims.jsonl"), cfg_.label_set()).claims;
  }

  EvalMode mode() const {
    return read_json_file(path("ingest_report.json")).at("evidence_mode").get<std::string>() == "id" ? EvalMode::kId
                                                                                                   : EvalMode::kText;
  }

  // Drops dangling corpus references, then claims left without evidence
  // usable in the dataset's evaluation mode.
  std::vector<std::string> ingest() {
    if (cfg_.claims_path.empty() || cfg_.corpus_path.empty())
      throw UsageError("config needs claims_path and corpus_path");
    auto loaded = load_claims(cfg_.claims_path, cfg_.label_set());
    const Corpus& docs = corpus();
    if (docs.empty()) throw DataError("corpus '" + cfg_.corpus_path + "' has no usable documents");
    const auto dangling = validate_references(loaded.claims, docs);
    for (const auto& d : dangling)
      log::warn("claim '" + d.claim_id + "' references unknown doc_id '" + d.doc_id + "'; reference dropped");
    const EvalMode m = dominant_mode(loaded.claims);
    std::vector<Claim> kept;
    size_t dropped = 0;
    for (auto c : loaded.claims) {
      std::vector<Evidence> ev;
      for (auto& e : c.evidence) {
        if (e.is_corpus_ref() && !docs.contains(e.doc_id())) continue;
        if (m == EvalMode::kId && !e.is_corpus_ref()) continue;
        ev.push_back(std::move(e));
      }
      c.evidence = std::move(ev);
      if (c.evidence.empty()) {
        ++dropped;
        continue;
      }
      kept.push_back(std::move(c));
    }
    if (kept.empty()) throw DataError("no claims with usable evidence remain after ingest");
    write_claims(path("claims.jsonl"), kept);
    json rep = {{"claims_in_file", loaded.claims.size() + loaded.skipped_no_evidence},
                {"claims_kept", kept.size()},
                {"skipped_no_evidence", loaded.skipped_no_evidence},
                {"dropped_unusable_evidence", dropped},
                {"dangling_refs", dangling.size()},
                {"documents", docs.size()},
                {"evidence_mode", to_string(m)}};
    write_file_atomic(path("ingest_report.json"), rep.dump(2) + "\n");
    return {"claims.jsonl", "ingest_report.json"};
  }

  std::vector<std::string> index() {
    if (cfg_.method == Method::kQuery2doc) {
      lexical::Bm25Index::build(corpus(), cfg_.bm25).save(path("index/bm25"));
      return {"index/bm25"};
    }
    dense::build_vector_index(corpus(), provider(), cfg_.embedding_model_id, static_cast<size_t>(cfg_.batch_size))
        .save(path("index/dense"));
    return {"index/dense"};
  }

  std::vector<std::string> expand() {
    auto run = expansion::generate_all(claims(), cfg_, provider());
    expansion::write_generations(path("generations.jsonl"), run.records);
    if (run.failed)
      throw ProviderError(std::to_string(run.failed) +
                          " generation(s) failed; successes are cached, rerun 'expand' to retry the failures");
    return {"generations.jsonl"};
  }

  // Pseudo-documents per (claim, repeat), in sample order.
  std::map<std::pair<std::string, int>, std::vector<std::string>> generations() const {
    std::map<std::pair<std::string, int>, std::vector<std::string>> out;
    for (const auto& g : expansion::load_generations(path("generations.jsonl"))) {
      if (g.generation_failed)
        throw DataError("generation for claim '" + g.claim_id + "' repeat " + std::to_string(g.repeat_index) +
                        " failed; rerun 'expand'");
      out[{g.claim_id, g.repeat_index}].push_back(g.text);
    }
    return out;
  }

  const std::vector<std::string>& pseudo_docs(
      const std::map<std::pair<std::string, int>, std::vector<std::string>>& gens, const std::string& claim_id,
      int repeat) const {
    auto it = gens.find({claim_id, repeat});
    if (it == gens.end())
      throw DataError("no generation for claim '" + claim_id + "' repeat " + std::to_string(repeat));
    return it->second;
  }

  std::vector<std::string> retrieve() {
    const auto cs = claims();
    if (cfg_.method == Method::kHyde) provider();
    const auto gens = generations();
    const size_t k = static_cast<size_t>(cfg_.k);
    std::vector<RankingRecord> out;
    for (const auto& c : cs) {
      out.push_back({c.id, kBaseline, 0, {}});
      for (int r = 0; r < cfg_.repeats; ++r) out.push_back({c.id, kExpanded, r, {}});
    }
    const size_t per_claim = static_cast<size_t>(cfg_.repeats) + 1;
    if (cfg_.method == Method::kQuery2doc) {
      const auto idx = lexical::Bm25Index::load(path("index/bm25"));
      parallel_for(out.size(), cfg_.max_in_flight, [&](size_t i) {
        auto& rec = out[i];
        const Claim& c = cs[i / per_claim];
        if (rec.condition == kBaseline) {
          rec.hits = idx.search(c.text, k);
        } else {
          rec.hits = idx.search(expansion::expand_query2doc(c.text, pseudo_docs(gens, c.id, rec.repeat_index)[0], cfg_.n), k);
        }
      });
    } else {
      const auto idx = dense::VectorIndex::load(path("index/dense"));
      dense::require_model(idx, cfg_.embedding_model_id);
      dense::require_dim(idx, provider());
      parallel_for(out.size(), cfg_.max_in_flight, [&](size_t i) {
        auto& rec = out[i];
        const Claim& c = cs[i / per_claim];
        if (rec.condition == kBaseline) {
          auto q = provider().embed(cfg_.embedding_model_id, {c.text});
          rec.hits = dense::dense_search(idx, q[0], cfg_.k);
        } else {
          rec.hits = dense::hyde_search(c, pseudo_docs(gens, c.id, rec.repeat_index), idx, provider(),
                                        cfg_.embedding_model_id, cfg_.k, cfg_.N);
        }
      });
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.order_key() < b.order_key(); });
    std::vector<json> rows;
    for (const auto& r : out) rows.push_back(to_json(r));
    write_json_lines(path("rankings.jsonl"), rows);
    return {"rankings.jsonl"};
  }

  std::vector<std::string> match() {
    const auto cs = claims();
    const auto gens = generations();
    struct Task {
      const Claim* claim;
      int repeat;
    };
    std::vector<Task> tasks;
    for (const auto& c : cs)
      for (int r = 0; r < cfg_.repeats; ++r) tasks.push_back({&c, r});
    providers::JudgeParams jp;
    jp.model_id = cfg_.judge_model_id;
    providers::Provider& p = provider();
    match::JudgeFn judge = [&](const std::string& premise, const std::string& hypothesis) {
      auto o = providers::nli_judge(p, premise, hypothesis, jp);
      return match::JudgeResult{o.label, o.parse_failed};
    };
    match::MatchOptions mo{cfg_.exhaustive, cfg_.premise_max_chars, 1};
    corpus();
    std::vector<match::MatchRecord> out(tasks.size());
    parallel_for(tasks.size(), cfg_.max_in_flight, [&](size_t i) {
      const Claim& c = *tasks[i].claim;
      std::vector<std::string> sentences;
      for (const auto& doc : pseudo_docs(gens, c.id, tasks[i].repeat))
        for (auto& s : match::segment_sentences(doc)) sentences.push_back(std::move(s));
      auto set = match::filter_reproductions(sentences, c.text, cfg_.rouge_threshold, cfg_.rouge_variant);
      set.claim_id = c.id;
      set.repeat_index = tasks[i].repeat;
      out[i] = match::match_document(resolve_evidence_texts(c, corpus()), set, judge, mo);
    });
    std::vector<json> rows;
    for (const auto& r : out) rows.push_back(match::to_json(r));
    write_json_lines(path("matches.jsonl"), rows);
    return {"matches.jsonl"};
  }

  std::map<std::tuple<std::string, std::string, int>, Ranking> rankings() const {
    std::map<std::tuple<std::string, std::string, int>, Ranking> out;
    for (auto& r : load_records<RankingRecord>(path("rankings.jsonl"), ranking_from_json))
      out[{r.condition, r.claim_id, r.repeat_index}] = std::move(r.hits);
    return out;
  }

  static const Ranking& ranking_for(const std::map<std::tuple<std::string, std::string, int>, Ranking>& rs,
                                    const std::string& condition, const std::string& claim_id, int repeat) {
    auto it = rs.find({condition, claim_id, repeat});
    if (it == rs.end())
      throw DataError("no " + condition + " ranking for claim '" + claim_id + "' repeat " + std::to_string(repeat));
    return it->second;
  }

  std::vector<std::string> doc_texts(const Ranking& hits, bool with_title) {
    std::vector<std::string> out;
    for (const auto& h : hits) {
      const Document* d = corpus().find(h.doc_id);
      if (!d) throw DataError("ranked doc_id '" + h.doc_id + "' is not in the corpus");
      out.push_back(with_title ? d->full_text() : d->text);
    }
    return out;
  }

  std::vector<std::string> verdict() {
    const auto cs = claims();
    const auto rs = rankings();
    std::vector<verdict::VerdictTask> tasks;
    for (const auto& c : cs) {
      tasks.push_back({c.id, c.text, kBaseline, 0, doc_texts(ranking_for(rs, kBaseline, c.id, 0), true)});
      for (int r = 0; r < cfg_.repeats; ++r)
        tasks.push_back({c.id, c.text, kExpanded, r, doc_texts(ranking_for(rs, kExpanded, c.id, r), true)});
    }
    verdict::VerdictOptions vo;
    vo.judge.model_id = cfg_.judge_model_id;
    vo.fallback_label = cfg_.fallback_label;
    vo.evidence_max_chars = cfg_.evidence_max_chars;
    auto out = verdict::verdict_run(tasks, cfg_.label_set(), provider(), vo, cfg_.max_in_flight);
    verdict::write_verdicts(path("verdicts.jsonl"), out);
    return {"verdicts.jsonl"};
  }

  std::vector<std::string> metric_names(EvalMode m) const {
    std::vector<std::string> out;
    if (m == EvalMode::kId) {
      out = {"recall@" + std::to_string(cfg_.k), "ndcg@" + std::to_string(cfg_.k)};
    } else {
      out = cfg_.text_scorers;
    }
    out.push_back(analysis::kF1);
    return out;
  }

  analysis::ClaimOutcome outcome(const Claim& c, const Ranking& hits, const std::vector<std::string>& metrics,
                                 EvalMode m) {
    analysis::ClaimOutcome o;
    o.claim_id = c.id;
    o.gold = c.label;
    if (m == EvalMode::kId) {
      metrics::RelevantSet rel;
      for (const auto& e : c.evidence)
        if (e.is_corpus_ref()) rel.insert(e.doc_id());
      o.scores[metrics[0]] = metrics::recall_at_k(hits, rel, static_cast<size_t>(cfg_.k));
      o.scores[metrics[1]] = metrics::ndcg_at_k(hits, rel, static_cast<size_t>(cfg_.k));
      return o;
    }
    const auto retrieved = doc_texts(hits, false);
    const auto gold = resolve_evidence_texts(c, corpus());
    for (const auto& s : cfg_.text_scorers) {
      if (s == "meteor") {
        o.scores[s] = metrics::evidence_text_score(retrieved, gold, metrics::meteor_matrix);
      } else {
        o.scores[s] = metrics::evidence_text_score(retrieved, gold, [&](const auto& a, const auto& b) {
          return provider().score_pairs(s, a, b);
        });
      }
    }
    return o;
  }

  std::vector<std::string> report() {
    const auto cs = claims();
    const auto rs = rankings();
    const EvalMode m = mode();
    const auto metrics = metric_names(m);
    std::map<std::tuple<std::string, std::string, int>, const verdict::VerdictRecord*> verdicts;
    const auto vrecs = verdict::load_verdicts(path("verdicts.jsonl"));
    for (const auto& v : vrecs) verdicts[{v.condition, v.claim_id, v.repeat_index}] = &v;
    auto predicted = [&](const std::string& cond, const std::string& id, int r) {
      auto it = verdicts.find({cond, id, r});
      if (it == verdicts.end())
        throw DataError("no " + cond + " verdict for claim '" + id + "' repeat " + std::to_string(r));
      return it->second->predicted;
    };

    analysis::ReportInput in;
    in.method = to_string(cfg_.method);
    in.baseline_name = cfg_.method == Method::kQuery2doc ? "BM25" : "Contriever";
    in.dataset = cfg_.dataset;
    in.evidence_mode = to_string(m);
    in.model_id = cfg_.model_id;
    in.k = cfg_.k;
    in.unit = cfg_.significance_unit;
    in.metrics = metrics;
    in.labels = cfg_.label_set();
    for (const auto& c : cs) {
      auto o = outcome(c, ranking_for(rs, kBaseline, c.id, 0), metrics, m);
      o.predicted = predicted(kBaseline, c.id, 0);
      in.baseline.push_back(std::move(o));
    }
    in.repeats.resize(static_cast<size_t>(cfg_.repeats));
    for (int r = 0; r < cfg_.repeats; ++r)
      for (const auto& c : cs) {
        auto o = outcome(c, ranking_for(rs, kExpanded, c.id, r), metrics, m);
        o.predicted = predicted(kExpanded, c.id, r);
        in.repeats[static_cast<size_t>(r)].claims.push_back(std::move(o));
      }

    uint64_t nli_failed = 0, empty_sets = 0, removed = 0, truncated_premises = 0;
    for (auto& rec : load_records<match::MatchRecord>(path("matches.jsonl"),
                                                      [](const json& j, const std::string&) {
                                                        return match::match_record_from_json(j);
                                                      })) {
      for (const auto& j : rec.judgments) nli_failed += j.parse_failed;
      empty_sets += rec.empty_sentence_set;
      removed += rec.removed_count;
      truncated_premises += rec.truncated_premises;
      if (rec.repeat_index < 0 || rec.repeat_index >= cfg_.repeats)
        throw DataError("match record for claim '" + rec.claim_id + "' has repeat " +
                        std::to_string(rec.repeat_index) + " outside the configured repeats");
      in.repeats[static_cast<size_t>(rec.repeat_index)].matches.push_back(std::move(rec));
    }
    uint64_t verdict_failed = 0, truncated_evidence = 0;
    for (const auto& v : vrecs) {
      verdict_failed += v.parse_failed;
      truncated_evidence += v.truncated_evidence;
    }
    const json ingest = read_json_file(path("ingest_report.json"));
    in.flags = {{"dangling_refs", ingest.at("dangling_refs").get<uint64_t>()},
                {"dropped_claims", ingest.at("dropped_unusable_evidence").get<uint64_t>() +
                                       ingest.at("skipped_no_evidence").get<uint64_t>()},
                {"empty_sentence_sets", empty_sets},
                {"nli_parse_failures", nli_failed},
                {"reproductions_removed", removed},
                {"truncated_evidence", truncated_evidence},
                {"truncated_premises", truncated_premises},
                {"verdict_parse_failures", verdict_failed}};

    const auto rep = analysis::build_report(in);
    write_file_atomic(path("report.json"), rep.dump(2) + "\n");
    write_file_atomic(path("report.txt"), analysis::render_report_text(rep));
    return {"report.json", "report.txt"};
  }

  RunConfig cfg_;
  RunOptions opts_;
  providers::ProviderBundle bundle_;
  std::optional<Corpus> corpus_;
};

}  // namespace qeleak::pipeline
