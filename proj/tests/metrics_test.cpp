#include <gtest/gtest.h>

#include <random>

#include "metrics_oracles.hpp"
#include "qeleak/metrics/classification.hpp"
#include "qeleak/metrics/evidence_score.hpp"
#include "qeleak/metrics/hungarian.hpp"
#include "qeleak/metrics/meteor.hpp"
#include "qeleak/metrics/ranking_metrics.hpp"

namespace qeleak::metrics {
namespace {

Ranking ranking_of(std::initializer_list<const char*> ids) {
  Ranking r;
  double s = 100;
  for (const char* id : ids) r.push_back({id, s--});
  return r;
}

TEST(Recall, Examples) {
  EXPECT_DOUBLE_EQ(recall_at_k(ranking_of({"x", "d1", "y", "z", "w"}), {"d1", "d2"}, 5), 0.5);
  EXPECT_DOUBLE_EQ(recall_at_k(ranking_of({"d2", "x", "d1"}), {"d1", "d2"}, 5), 1.0);
  EXPECT_DOUBLE_EQ(recall_at_k(ranking_of({"x", "d1"}), {"d1"}, 1), 0.0);
  EXPECT_THROW(recall_at_k(ranking_of({"x"}), {}, 5), DataError);
  EXPECT_THROW(recall_at_k(ranking_of({"x"}), {"x"}, 0), UsageError);
}

TEST(Ndcg, Examples) {
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranking_of({"d1", "x"}), {"d1"}, 5), 1.0);
  EXPECT_NEAR(ndcg_at_k(ranking_of({"x", "d1", "y"}), {"d1"}, 5), 1.0 / std::log2(3.0), 1e-15);
  EXPECT_NEAR(ndcg_at_k(ranking_of({"x", "d1", "y"}), {"d1"}, 5), 0.6309, 1e-4);
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranking_of({"x", "y"}), {"d1"}, 5), 0.0);
  // Ideal DCG uses min(|relevant|, k) items.
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranking_of({"a"}), {"a", "b", "c"}, 1), 1.0);
}

TEST(RankingMetrics, Properties) {
  std::mt19937 rng(5);
  for (int t = 0; t < 200; ++t) {
    Ranking r;
    for (int i = 0; i < 15; ++i) r.push_back({"d" + std::to_string(rng() % 30), 1.0});
    RelevantSet rel;
    for (int i = 0; i < 1 + static_cast<int>(rng() % 5); ++i) rel.insert("d" + std::to_string(rng() % 30));
    double prev = 0;
    for (size_t k = 1; k <= 15; ++k) {
      double rc = recall_at_k(r, rel, k);
      EXPECT_GE(rc, prev);
      prev = rc;
    }
    Ranking ideal;
    for (const auto& d : rel) ideal.push_back({d, 1.0});
    ideal.push_back({"zz", 0.0});
    for (size_t k = 1; k <= 6; ++k) EXPECT_NEAR(ndcg_at_k(ideal, rel, k), 1.0, 1e-12);
  }
}

TEST(MacroF1, Examples) {
  LabelSet ab({"A", "B"});
  EXPECT_DOUBLE_EQ(macro_f1({"A", "B"}, {"A", "B"}, ab), 1.0);
  EXPECT_NEAR(macro_f1({"A", "A"}, {"A", "B"}, ab), 1.0 / 3.0, 1e-15);
  EXPECT_THROW(macro_f1({"A"}, {"A", "B"}, ab), UsageError);
  // Labels absent from both sides still count in the mean.
  EXPECT_DOUBLE_EQ(macro_f1({"A"}, {"A"}, LabelSet({"A", "B", "C"})), 1.0 / 3.0);
}

TEST(MacroF1, InvariantUnderRelabeling) {
  std::mt19937 rng(9);
  const std::vector<std::string> names = {"p", "q", "r", "s"};
  const std::vector<std::string> perm = {"s", "p", "r", "q"};
  auto remap = [&](const std::string& l) { return perm[std::find(names.begin(), names.end(), l) - names.begin()]; };
  for (int t = 0; t < 100; ++t) {
    std::vector<Label> preds, golds, preds2, golds2;
    for (int i = 0; i < 30; ++i) {
      preds.push_back(names[rng() % 4]);
      golds.push_back(names[rng() % 4]);
      preds2.push_back(remap(preds.back()));
      golds2.push_back(remap(golds.back()));
    }
    EXPECT_NEAR(macro_f1(preds, golds, LabelSet(names)), macro_f1(preds2, golds2, LabelSet(perm)), 1e-12);
  }
}

TEST(Meteor, HandComputedValues) {
  EXPECT_DOUBLE_EQ(meteor("alpha beta", "gamma delta"), 0.0);
  EXPECT_NEAR(meteor("one two three", "one two three"), 1.0 - 0.5 / 27.0, 1e-12);
  EXPECT_NEAR(meteor("one two three", "one two three"), 0.98148, 1e-5);
  EXPECT_DOUBLE_EQ(meteor("cats", "cats"), 0.5);
  EXPECT_DOUBLE_EQ(meteor("", "cats"), 0.0);
}

TEST(Meteor, AgreesWithReferenceImplementationOnUnambiguousPairs) {
  // Frozen from a reference METEOR (exact + Porter stages, synonyms disabled).
  EXPECT_NEAR(meteor("a quick brown fox jumps", "the quick brown dog jumps"), 0.5111111111, 1e-9);
  EXPECT_NEAR(meteor("running dogs bark loudly", "the dog runs and barks"), 0.3061224490, 1e-9);
  EXPECT_NEAR(meteor("paris is the capital of france", "the capital of france is paris"), 0.9375, 1e-12);
  EXPECT_NEAR(meteor("evidence retrieval improves verification",
                     "verification of claims improves with retrieved evidence"),
              0.2985074627, 1e-9);
}

TEST(Meteor, PicksFewestChunksAmongMaximalAlignments) {
  // Greedy first-occurrence pairing would give 3 chunks; the optimum is 1.
  auto a = meteor_align({"b", "a", "b"}, {"a", "b"});
  EXPECT_EQ(a.matches, 2u);
  EXPECT_EQ(a.chunks, 1u);
}

TEST(Meteor, MatchesExhaustiveOracle) {
  std::mt19937 rng(77);
  const std::vector<std::string> vocab = {"run", "runs", "running", "cat", "cats", "the", "a", "dog"};
  for (int t = 0; t < 400; ++t) {
    std::vector<std::string> c, r;
    for (int i = 0; i < 1 + static_cast<int>(rng() % 6); ++i) c.push_back(vocab[rng() % vocab.size()]);
    for (int i = 0; i < 1 + static_cast<int>(rng() % 6); ++i) r.push_back(vocab[rng() % vocab.size()]);
    EXPECT_NEAR(meteor_from_tokens(c, r), testing::brute_force_meteor(c, r), 1e-12)
        << text::join(c, " ") << " | " << text::join(r, " ");
  }
}

TEST(Meteor, RangeAndSelfScore) {
  std::mt19937 rng(78);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> x;
    for (int i = 0; i < 1 + static_cast<int>(rng() % 10); ++i) x.push_back("w" + std::to_string(rng() % 20));
    std::vector<std::string> y;
    for (int i = 0; i < 1 + static_cast<int>(rng() % 10); ++i) y.push_back("w" + std::to_string(rng() % 20));
    double s = meteor_from_tokens(x, y);
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
    const double m = static_cast<double>(x.size());
    EXPECT_NEAR(meteor_from_tokens(x, x), 1.0 - 0.5 * std::pow(1.0 / m, 3.0), 1e-12);
  }
}

TEST(Hungarian, Examples) {
  auto r = hungarian_assign({{0.9, 0.1}, {0.2, 0.8}});
  EXPECT_EQ(r.pairs, (std::vector<std::pair<size_t, size_t>>{{0, 0}, {1, 1}}));
  EXPECT_NEAR(r.total, 1.7, 1e-12);
  EXPECT_NEAR(r.normalized, 0.85, 1e-12);

  EXPECT_DOUBLE_EQ(hungarian_assign({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}).normalized, 1.0);

  ScoreMatrix five_by_two(5, std::vector<double>(2, 0.0));
  five_by_two[3][0] = 0.7;
  five_by_two[1][1] = 0.4;
  auto fb = hungarian_assign(five_by_two);
  EXPECT_EQ(fb.pairs.size(), 2u);
  EXPECT_NEAR(fb.normalized, 1.1 / 2.0, 1e-12);

  EXPECT_TRUE(hungarian_assign({}).pairs.empty());
  EXPECT_EQ(hungarian_assign({{}}).normalized, 0.0);
}

TEST(Hungarian, NormalizesByReferenceCountEvenWhenCandidatesAreFewer) {
  auto r = hungarian_assign({{1.0, 0.0, 0.0}});
  EXPECT_EQ(r.pairs.size(), 1u);
  EXPECT_NEAR(r.normalized, 1.0 / 3.0, 1e-15);
}

TEST(Hungarian, BeatsRandomMatchingsAndMatchesExhaustiveOptimum) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    const size_t rows = 1 + rng() % 6, cols = 1 + rng() % 6;
    ScoreMatrix m(rows, std::vector<double>(cols));
    for (auto& row : m)
      for (auto& v : row) v = u(rng);
    auto res = hungarian_assign(m);
    EXPECT_EQ(res.pairs.size(), std::min(rows, cols));
    EXPECT_NEAR(res.total, testing::brute_force_assignment(m), 1e-9);
    for (int k = 0; k < 100; ++k) {
      std::vector<size_t> cperm(cols);
      std::iota(cperm.begin(), cperm.end(), 0);
      std::shuffle(cperm.begin(), cperm.end(), rng);
      std::vector<size_t> rperm(rows);
      std::iota(rperm.begin(), rperm.end(), 0);
      std::shuffle(rperm.begin(), rperm.end(), rng);
      double s = 0;
      for (size_t i = 0; i < std::min(rows, cols); ++i) s += m[rperm[i]][cperm[i]];
      EXPECT_GE(res.total + 1e-12, s);
    }
  }
}

TEST(EvidenceTextScore, MeteorExamples) {
  Strings gold = {"the tower was completed in 1889", "it stands in central paris"};
  Strings retrieved = {"unrelated words here", "it stands in central paris", "something else entirely",
                       "the tower was completed in 1889", "more noise"};
  EXPECT_GE(evidence_text_score(retrieved, gold, meteor_matrix), 0.98);
  EXPECT_DOUBLE_EQ(evidence_text_score({"alpha beta"}, {"gamma delta"}, meteor_matrix), 0.0);
  EXPECT_DOUBLE_EQ(evidence_text_score({}, gold, meteor_matrix), 0.0);
}

}  // namespace
}  // namespace qeleak::metrics
