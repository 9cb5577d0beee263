#include <gtest/gtest.h>

#include <random>

#include "qeleak/dense/vector_index.hpp"
#include "qeleak/expansion/expansion.hpp"
#include "qeleak/providers/mock.hpp"
#include "test_helpers.hpp"

namespace qeleak {
namespace {

using expansion::PromptTemplate;
using providers::MockBackend;
using providers::Provider;
using providers::Vector;
using qeleak::testing::TempDir;
using Strings = std::vector<std::string>;

std::shared_ptr<Provider> mock_provider(std::shared_ptr<MockBackend> mock, const fs::path& cache = {}) {
  return std::make_shared<Provider>(mock, mock, mock, cache, providers::RetryPolicy{3, std::chrono::milliseconds(0)});
}

Strings split_spaces(const std::string& s) {
  Strings out;
  size_t pos = 0;
  while (true) {
    size_t sp = s.find(' ', pos);
    out.push_back(s.substr(pos, sp - pos));
    if (sp == std::string::npos) break;
    pos = sp + 1;
  }
  return out;
}

TEST(Prompt, Query2docLayout) {
  Claim c{"c1", "X", std::nullopt, {}};
  EXPECT_EQ(expansion::render_prompt(expansion::prompt_for("fever", Method::kQuery2doc), c),
            "Write a passage that answers the following query: X");
}

TEST(Prompt, HydePerDataset) {
  Claim c{"c1", "Y", std::nullopt, {}};
  EXPECT_EQ(expansion::render_prompt(expansion::prompt_for("fever", Method::kHyde), c),
            "Please write a wikipedia passage to verify the claim.\nClaim: Y\nPassage:");
  EXPECT_EQ(expansion::render_prompt(expansion::prompt_for("scifact", Method::kHyde), c),
            "Please write a scientific paper passage to support/refute the claim.\nClaim: Y\nPassage:");
  EXPECT_EQ(expansion::render_prompt(expansion::prompt_for("averitec", Method::kHyde), c),
            "Please write a fact-checking article to verify the claim.\nClaim: Y\nPassage:");
  EXPECT_THROW(expansion::prompt_for("nope", Method::kHyde), UsageError);
}

TEST(Prompt, ClaimInsertedVerbatim) {
  PromptTemplate t("t", "<{CLAIM}>");
  EXPECT_EQ(t.render("line one\nline {CLAIM} two"), "<line one\nline {CLAIM} two>");
  EXPECT_EQ(t.render(""), "<>");
}

TEST(Prompt, SlotCountCheckedAtConstruction) {
  EXPECT_THROW(PromptTemplate("t", "no slot"), UsageError);
  EXPECT_THROW(PromptTemplate("t", "{CLAIM} and {CLAIM}"), UsageError);
  EXPECT_NO_THROW(PromptTemplate("t", "{CLAIM}"));
}

TEST(Query2doc, Examples) {
  EXPECT_EQ(expansion::expand_query2doc("a b", "x y", 2), "a b a b x y");
  EXPECT_EQ(expansion::expand_query2doc("q", "d", 1), "q d");
  EXPECT_EQ(expansion::expand_query2doc("q", "d"), "q q q q q d");
  EXPECT_THROW(expansion::expand_query2doc("", "d", 1), UsageError);
  EXPECT_THROW(expansion::expand_query2doc("q", "", 1), UsageError);
  EXPECT_THROW(expansion::expand_query2doc("q", "d", 0), UsageError);
}

TEST(Query2doc, RoundTripProperty) {
  std::mt19937_64 rng(2024);
  const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789.,'";
  auto random_tokens = [&](size_t min_len) {
    Strings toks(min_len + rng() % 6);
    for (auto& t : toks) {
      t.resize(1 + rng() % 7);
      for (auto& ch : t) ch = alphabet[rng() % alphabet.size()];
    }
    return toks;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const Strings claim = random_tokens(1), doc = random_tokens(1);
    const int n = 1 + static_cast<int>(rng() % 7);
    const std::string out = expansion::expand_query2doc(text::join(claim, " "), text::join(doc, " "), n);
    Strings expected;
    for (int i = 0; i < n; ++i) expected.insert(expected.end(), claim.begin(), claim.end());
    expected.insert(expected.end(), doc.begin(), doc.end());
    ASSERT_EQ(split_spaces(out), expected);
  }
}

// Independent reading of the averaging formula: each term (d_k + q) is built
// as its own vector, then the terms are averaged over N+1.
Vector oracle_hyde(const Vector& q, const std::vector<Vector>& docs) {
  std::vector<Vector> terms;
  for (const auto& d : docs) {
    Vector t(q.size());
    std::transform(d.begin(), d.end(), q.begin(), t.begin(), std::plus<>());
    terms.push_back(t);
  }
  Vector out(q.size(), 0.0);
  for (size_t i = 0; i < q.size(); ++i) {
    long double acc = 0;
    for (const auto& t : terms) acc += t[i];
    out[i] = static_cast<double>(acc / static_cast<long double>(docs.size() + 1));
  }
  return out;
}

TEST(Hyde, HandValues) {
  EXPECT_EQ(expansion::hyde_query_vector({1, 0}, {{0, 1}}), (Vector{0.5, 0.5}));
  EXPECT_EQ(expansion::hyde_query_vector({2, 2}, {{2, 2}}), (Vector{2, 2}));
  const Vector v = expansion::hyde_query_vector({1, 0}, {{0, 1}, {0, 3}});
  EXPECT_NEAR(v[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(v[1], 4.0 / 3.0, 1e-15);
  EXPECT_THROW(expansion::hyde_query_vector({1, 0}, {}), UsageError);
  EXPECT_THROW(expansion::hyde_query_vector({1, 0}, {{1, 0, 0}}), DataError);
}

TEST(Hyde, MatchesOracleAndIsLinear) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const size_t dim = 1 + rng() % 32;
    const size_t n_docs = 1 + rng() % 4;
    Vector q(dim);
    for (auto& x : q) x = g(rng);
    std::vector<Vector> docs(n_docs, Vector(dim));
    for (auto& d : docs)
      for (auto& x : d) x = g(rng);
    const Vector v = expansion::hyde_query_vector(q, docs);
    const Vector o = oracle_hyde(q, docs);
    for (size_t i = 0; i < dim; ++i) ASSERT_NEAR(v[i], o[i], 1e-12);
    if (n_docs == 1)
      for (size_t i = 0; i < dim; ++i) ASSERT_EQ(v[i], (q[i] + docs[0][i]) * 0.5);
    const double alpha = g(rng);
    Vector qa = q;
    for (auto& x : qa) x *= alpha;
    auto docs_a = docs;
    for (auto& d : docs_a)
      for (auto& x : d) x *= alpha;
    const Vector va = expansion::hyde_query_vector(qa, docs_a);
    for (size_t i = 0; i < dim; ++i) ASSERT_NEAR(va[i], alpha * v[i], 1e-12 * std::max(1.0, std::abs(alpha * v[i])));
  }
}

std::vector<Claim> three_claims() {
  return {{"c1", "Paris is in France.", "supported", {Evidence::corpus_ref("d1")}},
          {"c2", "The moon is cheese.", "refuted", {Evidence::corpus_ref("d2")}},
          {"c3", "Water boils at 100 C.", "supported", {Evidence::corpus_ref("d3")}}};
}

TEST(GenerateAll, CardinalityAndOrder) {
  TempDir dir;
  auto mock = std::make_shared<MockBackend>(1);
  auto p = mock_provider(mock, dir / "cache");
  RunConfig cfg;
  cfg.repeats = 2;
  auto run = expansion::generate_all(three_claims(), cfg, *p);
  ASSERT_EQ(run.records.size(), 6u);
  EXPECT_EQ(run.failed, 0u);
  for (size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(run.records[i].claim_id, "c" + std::to_string(i / 2 + 1));
    EXPECT_EQ(run.records[i].repeat_index, static_cast<int>(i % 2));
    EXPECT_EQ(run.records[i].prompt_id, "query2doc");
    EXPECT_FALSE(run.records[i].text.empty());
  }
  EXPECT_NE(run.records[0].text, run.records[1].text);
  EXPECT_EQ(RunConfig{}.repeats, 8);
}

TEST(GenerateAll, WarmCacheIsIdenticalWithZeroCalls) {
  TempDir dir;
  RunConfig cfg;
  cfg.repeats = 3;
  cfg.method = Method::kHyde;
  auto mock = std::make_shared<MockBackend>(4);
  auto p = mock_provider(mock, dir / "cache");
  auto first = expansion::generate_all(three_claims(), cfg, *p);
  expansion::write_generations(dir / "g1.jsonl", first.records);
  auto mock2 = std::make_shared<MockBackend>(4);
  auto p2 = mock_provider(mock2, dir / "cache");
  auto second = expansion::generate_all(three_claims(), cfg, *p2);
  expansion::write_generations(dir / "g2.jsonl", second.records);
  EXPECT_EQ(mock2->calls(), 0u);
  EXPECT_EQ(qeleak::testing::read_text(dir / "g1.jsonl"), qeleak::testing::read_text(dir / "g2.jsonl"));
  auto loaded = expansion::load_generations(dir / "g1.jsonl");
  ASSERT_EQ(loaded.size(), 9u);
  EXPECT_EQ(loaded[4].text, first.records[4].text);
  EXPECT_EQ(loaded[4].prompt_id, "hyde-fever");
}

class FlakyChat : public providers::ChatBackend {
 public:
  std::string complete(const providers::ChatRequest& req) override {
    if (req.prompt.find("moon") != std::string::npos) throw providers::TransientError("down", 503);
    return "generated text";
  }
};

TEST(GenerateAll, FailuresAreFlaggedNotDropped) {
  auto mock = std::make_shared<MockBackend>();
  Provider p(std::make_shared<FlakyChat>(), mock, mock, {}, {3, std::chrono::milliseconds(0)});
  RunConfig cfg;
  cfg.repeats = 2;
  auto run = expansion::generate_all(three_claims(), cfg, p);
  ASSERT_EQ(run.records.size(), 6u);
  EXPECT_EQ(run.failed, 2u);
  for (const auto& r : run.records) {
    EXPECT_EQ(r.generation_failed, r.claim_id == "c2");
    if (r.generation_failed) {
      EXPECT_TRUE(r.text.empty());
      EXPECT_NE(r.error.find("3 attempts"), std::string::npos);
    }
  }
}

TEST(GenerateAll, HydeDrawsNPerRepeat) {
  auto mock = std::make_shared<MockBackend>(2);
  auto p = mock_provider(mock);
  RunConfig cfg;
  cfg.method = Method::kHyde;
  cfg.repeats = 2;
  cfg.N = 3;
  auto run = expansion::generate_all(three_claims(), cfg, *p);
  ASSERT_EQ(run.records.size(), 18u);
  EXPECT_EQ(run.records[5].repeat_index, 1);
  EXPECT_EQ(run.records[5].sample_index, 2);
}

// Brute-force dense oracle: score every row, then sort the full list.
Ranking oracle_dense(const dense::VectorIndex& idx, const Vector& q, size_t k) {
  Ranking all;
  for (size_t r = 0; r < idx.size(); ++r) {
    double s = 0;
    for (size_t i = 0; i < idx.dim(); ++i) s += static_cast<double>(idx.row(r)[i]) * q[i];
    all.push_back({idx.doc_ids()[r], s});
  }
  std::stable_sort(all.begin(), all.end(), [](const Hit& a, const Hit& b) {
    return a.score > b.score || (a.score == b.score && a.doc_id < b.doc_id);
  });
  all.resize(std::min(k, all.size()));
  return all;
}

TEST(Dense, Examples) {
  dense::VectorIndex idx("m", 2);
  idx.add("b", {1, 0});
  idx.add("a", {0, 1});
  auto top = idx.search({1, 0}, 1);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0], (Hit{"b", 1.0}));
  auto orth = idx.search({0, 0}, 2);
  EXPECT_EQ(orth, (Ranking{{"a", 0.0}, {"b", 0.0}}));
  EXPECT_THROW(idx.search({1, 0, 0}, 1), DataError);
  EXPECT_THROW(idx.search({1, 0}, 0), UsageError);
  EXPECT_THROW(idx.add("c", {1}), DataError);
  EXPECT_THROW(idx.add("b", {1, 1}), DataError);
}

TEST(Dense, RandomIndexMatchesBruteForce) {
  std::mt19937_64 rng(50);
  std::normal_distribution<double> g;
  dense::VectorIndex idx("m", 16);
  for (int r = 0; r < 50; ++r) {
    Vector v(16);
    for (auto& x : v) x = (r % 7 == 0) ? 0.25 : g(rng);  // some exact ties
    idx.add("doc" + std::to_string(1000 - r), v);
  }
  for (int trial = 0; trial < 100; ++trial) {
    Vector q(16);
    for (auto& x : q) x = trial % 10 == 0 ? 1.0 : g(rng);
    const size_t k = 1 + rng() % 60;
    ASSERT_EQ(idx.search(q, static_cast<int>(k)), oracle_dense(idx, q, k));
    Vector q2 = q;
    for (auto& x : q2) x *= 3.5;
    auto a = idx.search(q, static_cast<int>(k)), b = idx.search(q2, static_cast<int>(k));
    for (size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i].doc_id, b[i].doc_id);
  }
}

Corpus small_corpus(size_t n) {
  std::vector<Document> docs;
  const Strings topics = {"river", "mountain", "city", "music", "planet", "ocean", "forest", "engine"};
  for (size_t i = 0; i < n; ++i)
    docs.push_back({"d" + std::to_string(i), std::nullopt,
                    "A passage about the " + topics[i % topics.size()] + " number " + std::to_string(i)});
  return Corpus(std::move(docs));
}

TEST(Dense, BuildPersistAndWarmRebuild) {
  TempDir dir;
  auto mock = std::make_shared<MockBackend>(8);
  auto p = mock_provider(mock, dir / "cache");
  auto idx = dense::build_vector_index(small_corpus(3), *p, "enc", 2);
  EXPECT_EQ(idx.size(), 3u);
  EXPECT_EQ(idx.dim(), 8u);
  idx.save(dir / "vec");
  EXPECT_EQ(fs::file_size(dir / "vec" / "vectors.f32"), 3u * 8u * 4u);
  auto loaded = dense::VectorIndex::load(dir / "vec");
  EXPECT_EQ(loaded.checksum(), idx.checksum());
  EXPECT_EQ(loaded.search({1, 0, 0, 0, 0, 0, 0, 0}, 3), idx.search({1, 0, 0, 0, 0, 0, 0, 0}, 3));
  const auto calls = mock->calls();
  dense::build_vector_index(small_corpus(3), *p, "enc", 2);
  EXPECT_EQ(mock->calls(), calls);
  EXPECT_THROW(dense::build_vector_index(Corpus(), *p, "enc"), DataError);

  // Little-endian float32 on disk.
  auto bytes = qeleak::testing::read_text(dir / "vec" / "vectors.f32");
  uint32_t u = 0;
  for (int b = 3; b >= 0; --b) u = (u << 8) | static_cast<unsigned char>(bytes[b]);
  EXPECT_EQ(std::bit_cast<float>(u), idx.row(0)[0]);

  bytes[5] ^= 0x40;
  qeleak::testing::write_text(dir / "vec" / "vectors.f32", bytes);
  EXPECT_THROW(dense::VectorIndex::load(dir / "vec"), DataError);
}

TEST(Dense, RefusesModelMismatch) {
  auto mock = std::make_shared<MockBackend>();
  auto p = mock_provider(mock);
  auto idx = dense::build_vector_index(small_corpus(4), *p, "enc-a");
  Claim c{"c", "a claim", std::nullopt, {}};
  EXPECT_THROW(dense::hyde_search(c, {"doc"}, idx, *p, "enc-b", 2), UsageError);
  EXPECT_THROW(dense::hyde_search(c, {}, idx, *p, "enc-a", 2), DataError);
}

class FixedDimEmbedder : public providers::EmbeddingBackend {
 public:
  std::vector<Vector> embed(const std::string&, const Strings& texts) override {
    return std::vector<Vector>(texts.size(), Vector(4, 0.5));
  }
  std::optional<size_t> advertised_dim() override { return 5; }
};

TEST(Dense, RefusesAdvertisedDimMismatch) {
  auto mock = std::make_shared<MockBackend>();
  Provider p(mock, std::make_shared<FixedDimEmbedder>(), mock, {}, {});
  EXPECT_THROW(dense::build_vector_index(small_corpus(2), p, "enc"), UsageError);
}

TEST(Dense, HydeSearchComposes) {
  auto mock = std::make_shared<MockBackend>(3);
  auto p = mock_provider(mock);
  const Corpus corpus = small_corpus(20);
  auto idx = dense::build_vector_index(corpus, *p, "enc", 7);
  Claim c{"c", "Where is the river?", std::nullopt, {}};
  const std::string doc = "The river flows past the city toward the ocean.";
  const auto got = dense::hyde_search(c, {doc}, idx, *p, "enc", 5);
  const auto q = p->embed("enc", {c.text})[0];
  const auto d = p->embed("enc", {doc})[0];
  Vector composed(q.size());
  for (size_t i = 0; i < q.size(); ++i) composed[i] = (d[i] + q[i]) / 2.0;
  EXPECT_EQ(got, dense::dense_search(idx, composed, 5));

  // g(d) = g(q): the composed vector is g(q) and the ranking matches a plain query.
  const auto same = dense::hyde_search(c, {c.text}, idx, *p, "enc", 5);
  EXPECT_EQ(same, dense::dense_search(idx, q, 5));
}

}  // namespace
}  // namespace qeleak
