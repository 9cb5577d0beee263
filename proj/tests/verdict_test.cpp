#include <gtest/gtest.h>

#include <deque>
#include <mutex>

#include "qeleak/providers/mock.hpp"
#include "qeleak/verdict/verdict.hpp"
#include "test_helpers.hpp"

namespace qeleak::verdict {
namespace {

using providers::MockBackend;
using providers::Provider;
using qeleak::testing::TempDir;

class ScriptedChat : public providers::ChatBackend {
 public:
  explicit ScriptedChat(std::deque<std::string> s) : script_(std::move(s)) {}
  std::string complete(const providers::ChatRequest& req) override {
    std::lock_guard lock(mu_);
    ++calls;
    last_prompt = req.prompt;
    std::string next = script_.front();
    if (script_.size() > 1) script_.pop_front();
    return next;
  }
  int calls = 0;
  std::string last_prompt;

 private:
  std::deque<std::string> script_;
  std::mutex mu_;
};

struct Harness {
  explicit Harness(std::deque<std::string> script) : chat(std::make_shared<ScriptedChat>(std::move(script))) {
    auto mock = std::make_shared<MockBackend>();
    provider = std::make_shared<Provider>(chat, mock, mock, fs::path{}, providers::RetryPolicy{3, {}});
  }
  VerdictRecord run(const std::string& dataset = "fever") {
    return predict_verdict(*provider, "c1", "The claim.", {"Evidence text."}, LabelSet::for_dataset(dataset), {});
  }
  std::shared_ptr<ScriptedChat> chat;
  std::shared_ptr<Provider> provider;
};

TEST(VerdictPrompt, Snapshot) {
  const std::string p =
      render_verdict_prompt("Paris is in France.", {"Paris is the capital of France.", "France is in Europe."},
                            LabelSet::for_dataset("fever"));
  EXPECT_EQ(p,
            "Your task is to predict the verdict of a claim based on the provided evidence. Select one of the "
            "following labels: supported, refuted, not enough evidence.\n"
            "Generate only the label without additional explanation or content.\n\n"
            "Claim: Paris is in France.\n\n"
            "Evidence 1: Paris is the capital of France.\n"
            "Evidence 2: France is in Europe.\n\n"
            "Label:");
  EXPECT_EQ(p, render_verdict_prompt("Paris is in France.",
                                     {"Paris is the capital of France.", "France is in Europe."},
                                     LabelSet::for_dataset("fever")));
}

TEST(Verdict, ParsesCanonicalLabelsAndAliases) {
  EXPECT_EQ(Harness({"supported"}).run().predicted, "supported");
  EXPECT_EQ(Harness({"  Refuted.\n"}).run().predicted, "refuted");
  EXPECT_EQ(Harness({"CONTRADICT"}).run("scifact").predicted, "refuted");
  EXPECT_EQ(Harness({"NOT ENOUGH INFO"}).run("fever").predicted, "not enough evidence");
  EXPECT_EQ(Harness({"Label: Conflicting Evidence/Cherrypicking"}).run("averitec").predicted, "conflicting evidence");
}

TEST(Verdict, FallbackAfterOneReask) {
  Harness h({"It is probably true."});
  auto r = h.run();
  EXPECT_TRUE(r.parse_failed);
  EXPECT_EQ(r.predicted, "not enough evidence");
  EXPECT_EQ(r.raw_response, "It is probably true.");
  EXPECT_EQ(h.chat->calls, 2);
  Harness h2({"dunno", "supported"});
  auto r2 = h2.run();
  EXPECT_FALSE(r2.parse_failed);
  EXPECT_EQ(r2.predicted, "supported");
}

TEST(Verdict, PredictedAlwaysInLabelSet) {
  const std::vector<std::string> pool = {"supported", "maybe", "", "REFUTES", "true", "nei", "!!"};
  const auto labels = LabelSet::for_dataset("fever");
  for (const auto& a : pool)
    for (const auto& b : pool) EXPECT_TRUE(labels.contains(Harness({a, b}).run().predicted)) << a << "/" << b;
}

TEST(Verdict, EvidenceTruncatedAndCounted) {
  Harness h({"supported"});
  VerdictOptions opts;
  opts.evidence_max_chars = 10;
  auto r = predict_verdict(*h.provider, "c", "claim", {"short", std::string(50, 'x')},
                           LabelSet::for_dataset("fever"), opts);
  EXPECT_EQ(r.truncated_evidence, 1u);
  EXPECT_EQ(r.evidence_used[1], std::string(10, 'x'));
  EXPECT_NE(h.chat->last_prompt.find("Evidence 2: xxxxxxxxxx\n\nLabel:"), std::string::npos);
  EXPECT_THROW(predict_verdict(*h.provider, "c", "claim", {}, LabelSet::for_dataset("fever"), opts), UsageError);
  opts.fallback_label = "bogus";
  EXPECT_THROW(predict_verdict(*h.provider, "c", "claim", {"e"}, LabelSet::for_dataset("fever"), opts), UsageError);
}

TEST(VerdictRun, RecordsPerClaimRepeatAndWarmCache) {
  TempDir dir;
  std::vector<VerdictTask> tasks;
  for (int c = 0; c < 2; ++c)
    for (int r = 0; r < 2; ++r)
      tasks.push_back({"c" + std::to_string(c), "claim number " + std::to_string(c), "expanded", r,
                       {"evidence " + std::to_string(c) + std::to_string(r)}});
  auto run_once = [&](const fs::path& out) {
    auto mock = std::make_shared<MockBackend>(9);
    Provider p(mock, mock, mock, dir / "cache", {});
    auto recs = verdict_run(tasks, LabelSet::for_dataset("fever"), p, {}, 4);
    write_verdicts(out, recs);
    return std::make_pair(recs, mock->calls());
  };
  auto [first, calls1] = run_once(dir / "v1.jsonl");
  ASSERT_EQ(first.size(), 4u);
  EXPECT_EQ(first[3].claim_id, "c1");
  EXPECT_EQ(first[3].repeat_index, 1);
  EXPECT_GT(calls1, 0u);
  auto [second, calls2] = run_once(dir / "v2.jsonl");
  EXPECT_EQ(calls2, 0u);
  EXPECT_EQ(qeleak::testing::read_text(dir / "v1.jsonl"), qeleak::testing::read_text(dir / "v2.jsonl"));
  auto loaded = load_verdicts(dir / "v1.jsonl");
  ASSERT_EQ(loaded.size(), 4u);
  EXPECT_EQ(loaded[2].predicted, first[2].predicted);
  EXPECT_EQ(loaded[2].evidence_used, first[2].evidence_used);
}

}  // namespace
}  // namespace qeleak::verdict
