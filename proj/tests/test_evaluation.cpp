#include <filesystem>

#include <gtest/gtest.h>

#include "eae/evaluation.hpp"
#include "eae/rng.hpp"
#include "eae/synthetic.hpp"
#include "fixtures.hpp"

namespace eae {
namespace {

using testing::figure_corpus;

PredictionRecord rec(const std::string& role, std::vector<Span> spans, int event = 1) {
  return PredictionRecord{"fig1", event, role, std::move(spans), "role", "markers"};
}

// Counting oracle written independently of evaluate(): a flat list of gold
// tuples, each consumed by the first matching prediction.
MatchCounts brute_force(const std::vector<PredictionRecord>& preds, const CorpusSplit& gold) {
  std::vector<std::tuple<std::string, int, std::string, int, int>> pool;
  for (const auto& d : gold.documents) {
    const auto& ev = gold.events_of(d.doc_key);
    for (int i = 0; i < static_cast<int>(ev.size()); ++i) {
      for (const auto& [r, spans] : ev[static_cast<std::size_t>(i)].arguments) {
        for (const auto& s : spans) pool.emplace_back(d.doc_key, i, r, s.start, s.end);
      }
    }
  }
  MatchCounts c;
  c.n_gold = static_cast<long>(pool.size());
  for (const auto& p : preds) {
    for (const auto& s : p.spans) {
      ++c.n_pred;
      auto it = std::find(pool.begin(), pool.end(), std::make_tuple(p.doc_key, p.event_index, p.role, s.start, s.end));
      if (it != pool.end()) {
        ++c.tp;
        pool.erase(it);
      }
    }
  }
  return c;
}

TEST(Match, ExactSpanOnly) {
  const auto gold = figure_corpus();
  EXPECT_EQ(match({rec("victim", {{12, 13}})}, gold), (MatchCounts{1, 1, 6}));
  EXPECT_EQ(match({rec("victim", {{12, 12}})}, gold), (MatchCounts{0, 1, 6}));
  EXPECT_EQ(match({rec("killer", {{12, 13}})}, gold), (MatchCounts{0, 1, 6}));
  EXPECT_EQ(match({rec("victim", {{12, 13}}, 0)}, gold), (MatchCounts{0, 1, 6}));
}

TEST(Match, GoldMatchedAtMostOnce) {
  const auto gold = figure_corpus();
  EXPECT_EQ(match({rec("victim", {{12, 13}}), rec("victim", {{12, 13}})}, gold), (MatchCounts{1, 2, 6}));
}

TEST(Match, GoldAgainstItselfIsPerfect) {
  const auto gold = figure_corpus();
  const auto r = evaluate(gold_as_predictions(gold), gold);
  EXPECT_DOUBLE_EQ(r.overall.f1, 1.0);
  EXPECT_EQ(r.counts, (MatchCounts{6, 6, 6}));
}

TEST(Match, EmptyPredictions) {
  const auto r = evaluate({}, figure_corpus());
  EXPECT_EQ(r.overall.precision, 0.0);
  EXPECT_EQ(r.overall.recall, 0.0);
  EXPECT_EQ(r.overall.f1, 0.0);
}

TEST(Match, DanglingReferenceIsIntegrityError) {
  const auto gold = figure_corpus();
  EXPECT_THROW(evaluate({rec("victim", {{1, 1}}, 5)}, gold), IntegrityError);
  PredictionRecord r = rec("victim", {{1, 1}});
  r.doc_key = "nope";
  EXPECT_THROW(evaluate({r}, gold), IntegrityError);
}

TEST(Match, ScopeRestrictsGoldAndPredictions) {
  const auto gold = figure_corpus();
  const auto r = evaluate({rec("victim", {{12, 13}}), rec("passenger", {{0, 0}}, 0)}, gold, EvalScope{{"fig1", 1}});
  EXPECT_EQ(r.counts, (MatchCounts{1, 1, 3}));
}

TEST(Prf1, WorkedExample) {
  EXPECT_NEAR(f1_from_pr(0.424, 0.449) * 100.0, 43.6, 0.05);
  const auto s = prf1(3, 4, 6);
  EXPECT_DOUBLE_EQ(s.precision, 0.75);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.f1, 0.6);
}

TEST(Prf1, Errors) {
  EXPECT_THROW(prf1(5, 4, 10), UsageError);
  EXPECT_THROW(prf1(5, 10, 4), UsageError);
  EXPECT_EQ(prf1(0, 0, 0).f1, 0.0);
}

TEST(Prf1Property, ScaleInvariant) {
  Rng rng(2);
  for (int c = 0; c < 200; ++c) {
    const long g = 1 + static_cast<long>(rng.below(100));
    const long p = 1 + static_cast<long>(rng.below(100));
    const long tp = static_cast<long>(rng.below(static_cast<std::uint64_t>(std::min(g, p)) + 1));
    const long k = 1 + static_cast<long>(rng.below(9));
    const auto a = prf1(tp, p, g), b = prf1(tp * k, p * k, g * k);
    ASSERT_NEAR(a.f1, b.f1, 1e-12);
    ASSERT_NEAR(a.precision, b.precision, 1e-12);
    ASSERT_GE(a.f1, std::min(a.precision, a.recall) - 1e-12);
    ASSERT_LE(a.f1, std::max(a.precision, a.recall) + 1e-12);
  }
}

TEST(MatchProperty, AgreesWithBruteForceAndOrderInvariant) {
  synthetic::Options opts;
  opts.train_docs = 12;
  opts.seed = 31;
  const auto gold = synthetic::generate(opts);
  const auto ontology = synthetic::ontology();
  Rng rng(4);
  for (int c = 0; c < 100; ++c) {
    std::vector<PredictionRecord> preds;
    for (const auto& d : gold.documents) {
      const auto& ev = gold.events_of(d.doc_key);
      for (int i = 0; i < static_cast<int>(ev.size()); ++i) {
        for (const auto& role : ontology.roles_for(ev[static_cast<std::size_t>(i)].trigger.event_type)) {
          PredictionRecord r{d.doc_key, i, role, {}, "role", "markers"};
          if (const auto* s = ev[static_cast<std::size_t>(i)].spans_for(role); s && rng.bernoulli(0.6)) {
            r.spans.push_back(s->front());
          }
          if (rng.bernoulli(0.3)) {
            const int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(d.size())));
            r.spans.push_back(Span{a, std::min(a + static_cast<int>(rng.below(3)), d.size() - 1)});
          }
          if (!r.spans.empty() && rng.bernoulli(0.1)) r.spans.push_back(r.spans.front());
          preds.push_back(r);
        }
      }
    }
    const auto counts = match(preds, gold);
    ASSERT_EQ(counts, brute_force(preds, gold));
    rng.shuffle(preds);
    ASSERT_EQ(match(preds, gold), counts);
  }
}

TEST(Predictions, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "eae_preds_test.jsonl";
  const std::vector<PredictionRecord> preds = {rec("victim", {{12, 13}}), rec("place", {})};
  write_predictions(path, preds);
  EXPECT_EQ(read_predictions(path), preds);
}

TEST(Predictions, MalformedRecordIsFormatError) {
  const auto path = std::filesystem::temp_directory_path() / "eae_preds_bad.jsonl";
  std::ofstream(path) << R"({"doc_key": "fig1", "role": "victim"})" << '\n';
  EXPECT_THROW(read_predictions(path), FormatError);
}

TEST(Report, JsonRoundTrip) {
  const auto r = evaluate({rec("victim", {{12, 13}, {0, 0}})}, figure_corpus());
  const auto j = r.to_json();
  EXPECT_EQ(j.at("p"), 50.0);
  EXPECT_EQ(j.at("matcher"), "exact-span");
  const auto back = EvalReport::from_json(j);
  EXPECT_EQ(back.counts, r.counts);
  EXPECT_DOUBLE_EQ(back.overall.f1, r.overall.f1);
}

EvalReport report_with(long tp, long pred, long gold) {
  EvalReport r;
  r.counts = {tp, pred, gold};
  r.overall = prf1(tp, pred, gold);
  return r;
}

TEST(Grid, Snapshot) {
  const std::vector<GridRun> runs = {
      {"mrole", "BERT-b", "ce", report_with(40, 100, 90)},
      {"role", "BERT-b", "dice", report_with(45, 100, 100)},
      {"role", "BERT-b", "ce", report_with(42, 100, 100)},
      {"role", "RoBERTa-l", "ce", report_with(50, 100, 100)},
  };
  const auto table = report_grid(runs);
  const std::string expected =
      "                         | RAMS              | RAMS w dice\n"
      "Model         PLM        |    P     R    F1  |    P     R    F1\n"
      "R-Prompt      BERT-b     | 42.0  42.0  42.0  | 45.0  45.0  45.0\n"
      "R-Prompt      RoBERTa-l  | 50.0  50.0  50.0  |    -     -     -\n"
      "mRole-Prompt  BERT-b     | 40.0  44.4  42.1  |    -     -     -\n";
  EXPECT_EQ(table.text, expected);
  EXPECT_EQ(table.data["rows"].size(), 3u);
  EXPECT_EQ(table.data["rows"][0]["dice"]["f1"], 45.0);
  EXPECT_TRUE(table.data["rows"][1]["dice"].is_null());
}

TEST(Grid, EmptyRunsGiveHeaderOnly) {
  const auto table = report_grid({});
  EXPECT_TRUE(table.data["rows"].empty());
  EXPECT_NE(table.text.find("Model"), std::string::npos);
  EXPECT_EQ(std::count(table.text.begin(), table.text.end(), '\n'), 2);
}

}  // namespace
}  // namespace eae
