#include <gtest/gtest.h>

#include <random>

#include "qeleak/core/config.hpp"
#include "qeleak/core/dataset.hpp"
#include "qeleak/core/text.hpp"
#include "test_helpers.hpp"

namespace qeleak {
namespace {

using testing::TempDir;
using testing::write_text;

TEST(Text, NormalizeLowercasesAndComposes) {
  // "e" + combining acute composes to U+00E9 under NFC.
  EXPECT_EQ(text::normalize("Cafe\xCC\x81"), "caf\xC3\xA9");
  EXPECT_EQ(text::normalize("CAF\xC3\x89"), "caf\xC3\xA9");
}

TEST(Text, WordTokensSplitOnNonAlphanumerics) {
  EXPECT_EQ(text::word_tokens("The Cats, sat-down 42x!"),
            (std::vector<std::string>{"the", "cats", "sat", "down", "42x"}));
  EXPECT_TRUE(text::word_tokens(" ...  ").empty());
}

TEST(Text, TruncateCountsCodePoints) {
  bool cut = false;
  EXPECT_EQ(text::truncate_chars("h\xC3\xA9llo", 2, &cut), "h\xC3\xA9");
  EXPECT_TRUE(cut);
  EXPECT_EQ(text::truncate_chars("abc", 3, &cut), "abc");
  EXPECT_FALSE(cut);
}

TEST(LabelSet, AliasesAreCaseInsensitive) {
  auto scifact = LabelSet::for_dataset("scifact");
  EXPECT_EQ(scifact.normalize("CONTRADICT"), "refuted");
  EXPECT_EQ(scifact.normalize("contradict"), "refuted");
  EXPECT_EQ(scifact.normalize(" Supported "), "supported");
  EXPECT_THROW(scifact.normalize("maybe"), DataError);
}

TEST(LabelSet, NormalizationIsIdempotent) {
  for (const char* ds : {"fever", "scifact", "averitec"}) {
    auto ls = LabelSet::for_dataset(ds);
    for (const auto& [alias, target] : ls.alias_table()) {
      auto once = ls.normalize(alias);
      EXPECT_EQ(ls.normalize(once), once) << ds << " " << alias;
    }
  }
}

TEST(LabelSet, RejectsConflictingAliases) {
  EXPECT_THROW(LabelSet({"a", "b"}, {{"x", "c"}}), DataError);
  EXPECT_THROW(LabelSet({"a", "a"}), DataError);
  EXPECT_THROW(LabelSet({"a", "b"}, {{"B", "a"}}), DataError);
}

class ClaimsFile : public ::testing::Test {
 protected:
  TempDir dir;
  LabelSet labels = LabelSet::for_dataset("scifact");

  ClaimsLoad load(const std::string& contents) {
    write_text(dir / "claims.jsonl", contents);
    return load_claims(dir / "claims.jsonl", labels);
  }
};

TEST_F(ClaimsFile, MapsFieldsDirectly) {
  auto r = load(R"({"id":"c1","claim":"X.","label":"supported","evidence":[{"doc_id":"d9"}]})" "\n");
  ASSERT_EQ(r.claims.size(), 1u);
  const Claim& c = r.claims[0];
  EXPECT_EQ(c.id, "c1");
  EXPECT_EQ(c.text, "X.");
  EXPECT_EQ(c.label, "supported");
  ASSERT_EQ(c.evidence.size(), 1u);
  EXPECT_TRUE(c.evidence[0].is_corpus_ref());
  EXPECT_EQ(c.evidence[0].doc_id(), "d9");
}

TEST_F(ClaimsFile, SkipsClaimsWithoutEvidence) {
  auto r = load(R"({"id":"c1","claim":"X.","label":null,"evidence":[]})" "\n"
                R"({"id":"c2","claim":"Y.","label":null})" "\n"
                R"({"id":"c3","claim":"Z.","label":null,"evidence":[{"text":"z"}]})" "\n");
  EXPECT_EQ(r.skipped_no_evidence, 2u);
  ASSERT_EQ(r.claims.size(), 1u);
  EXPECT_EQ(r.claims[0].id, "c3");
  EXPECT_FALSE(r.claims[0].label.has_value());
}

TEST_F(ClaimsFile, ContradictBecomesRefuted) {
  auto r = load(R"({"id":"c1","claim":"X.","label":"CONTRADICT","evidence":[{"doc_id":"d"}]})" "\n");
  EXPECT_EQ(r.claims.at(0).label, "refuted");
}

TEST_F(ClaimsFile, ErrorsNameTheProblem) {
  try {
    load(R"({"id":"c1","claim":"X.","label":null,"evidence":[{"doc_id":"d"}]})" "\n{oops\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  try {
    load(R"({"id":"c1","claim":"X.","label":"perhaps","evidence":[{"doc_id":"d"}]})" "\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("perhaps"), std::string::npos);
  }
  EXPECT_THROW(load(R"({"id":"c1","claim":"X.","evidence":[{"doc_id":"d"}]})" "\n"
                    R"({"id":"c1","claim":"Y.","evidence":[{"doc_id":"d"}]})" "\n"),
               DataError);
  EXPECT_THROW(load(R"({"id":"c1","claim":"  ","evidence":[{"doc_id":"d"}]})" "\n"), DataError);
  EXPECT_THROW(load(R"({"id":"c1","claim":"x","evidence":[{"doc_id":"d","text":"t"}]})" "\n"), DataError);
}

TEST_F(ClaimsFile, RoundTripPreservesStructure) {
  std::mt19937 rng(7);
  std::vector<Claim> claims;
  const std::vector<std::string> labels_pool = {"supported", "refuted", "not enough evidence"};
  for (int i = 0; i < 50; ++i) {
    Claim c;
    c.id = "c" + std::to_string(i);
    c.text = "claim \"" + std::to_string(rng()) + "\"\nwith newline and \xC3\xA9";
    if (rng() % 3) c.label = labels_pool[rng() % 3];
    int ne = 1 + static_cast<int>(rng() % 3);
    for (int e = 0; e < ne; ++e)
      c.evidence.push_back(rng() % 2 ? Evidence::corpus_ref("d" + std::to_string(rng() % 100))
                                     : Evidence::free_text("evidence " + std::to_string(rng())));
    claims.push_back(std::move(c));
  }
  write_claims(dir / "out.jsonl", claims);
  auto r = load_claims(dir / "out.jsonl", labels);
  EXPECT_EQ(r.claims, claims);
  for (const auto& c : r.claims) EXPECT_FALSE(c.evidence.empty());
}

TEST(Corpus, LoadsAndReportsDuplicates) {
  TempDir dir;
  write_text(dir / "c.jsonl", R"({"doc_id":"a","title":"T","text":"x"})" "\n"
                              R"({"doc_id":"b","title":null,"text":"y"})" "\n"
                              R"({"doc_id":"c","text":"z"})" "\n");
  auto r = load_corpus(dir / "c.jsonl");
  EXPECT_EQ(r.corpus.size(), 3u);
  EXPECT_EQ(r.corpus.find("a")->full_text(), "T\nx");
  EXPECT_EQ(r.corpus.find("b")->full_text(), "y");

  write_text(dir / "d.jsonl", R"({"doc_id":"a","text":"x"})" "\n"
                              R"({"doc_id":"b","text":"x"})" "\n"
                              R"({"doc_id":"c","text":"x"})" "\n"
                              R"({"doc_id":"e","text":"x"})" "\n"
                              R"({"doc_id":"b","text":"x"})" "\n");
  try {
    load_corpus(dir / "d.jsonl");
    FAIL();
  } catch (const DataError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("lines 2 and 5"), std::string::npos) << msg;
  }
}

TEST(Corpus, SkipsEmptyDocuments) {
  TempDir dir;
  write_text(dir / "c.jsonl", R"({"doc_id":"a","text":"x"})" "\n" R"({"doc_id":"b","text":"   "})" "\n");
  auto r = load_corpus(dir / "c.jsonl");
  EXPECT_EQ(r.corpus.size(), 1u);
  EXPECT_EQ(r.skipped_empty, 1u);
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(ValidateReferences, ReportsDanglingRefsOnly) {
  Corpus corpus({{"d1", std::nullopt, "x"}, {"d2", std::nullopt, "y"}});
  Claim ok{"c1", "t", std::nullopt, {Evidence::corpus_ref("d1"), Evidence::corpus_ref("d2")}};
  Claim bad{"c2", "t", std::nullopt, {Evidence::corpus_ref("d1"), Evidence::corpus_ref("d7")}};
  Claim text_only{"c3", "t", std::nullopt, {Evidence::free_text("human written")}};
  EXPECT_TRUE(validate_references({ok}, corpus).empty());
  EXPECT_EQ(validate_references({ok, bad}, corpus), (std::vector<DanglingRef>{{"c2", "d7"}}));
  EXPECT_TRUE(validate_references({text_only}, Corpus{}).empty());
}

TEST(RunConfig, DefaultsAndValidation) {
  RunConfig c = config_from_json(json::object());
  EXPECT_EQ(c.repeats, 8);
  EXPECT_EQ(c.k, 5);
  EXPECT_EQ(c.n, 5);
  EXPECT_EQ(c.N, 1);
  EXPECT_DOUBLE_EQ(c.gen.temperature, 0.7);
  EXPECT_DOUBLE_EQ(c.gen.top_p, 1.0);
  EXPECT_EQ(c.gen.max_tokens, 512);
  EXPECT_DOUBLE_EQ(c.rouge_threshold, 0.95);
  EXPECT_THROW(config_from_json(json{{"repeats", 0}}), UsageError);
  EXPECT_THROW(config_from_json(json{{"k", 0}}), UsageError);
  EXPECT_THROW(config_from_json(json{{"rouge_threshold", 1.5}}), UsageError);
  EXPECT_THROW(config_from_json(json{{"method", "bm42"}}), UsageError);
  EXPECT_THROW(config_from_json(json{{"repeats", "eight"}}), UsageError);
}

TEST(RunConfig, JsonRoundTrip) {
  RunConfig c = config_from_json(json{{"method", "hyde"}, {"repeats", 3}, {"dataset", "averitec"}, {"seed", 11}});
  RunConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.method, Method::kHyde);
}

}  // namespace
}  // namespace qeleak
