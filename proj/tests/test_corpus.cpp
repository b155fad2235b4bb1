#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "eae/corpus.hpp"
#include "eae/ontology.hpp"
#include "eae/synthetic.hpp"
#include "fixtures.hpp"

namespace eae {
namespace {

const char* kLine =
    R"({"doc_key": "d1", "split": "train", "sentences": [["Gretta", "was", "moved", "."]], )"
    R"("evt_triggers": [[2, 2, [["transport.person", 1.0]]]], )"
    R"("gold_evt_links": [[[2, 2], [0, 0], "evt001arg02passenger"]], "ent_spans": []})";

CorpusSplit load_string(const std::string& s, std::optional<Split> split = std::nullopt) {
  std::istringstream in(s);
  return load_rams_stream(in, split);
}

TEST(Corpus, SingleSyntheticLine) {
  const auto c = load_string(kLine);
  ASSERT_EQ(c.documents.size(), 1u);
  EXPECT_EQ(c.event_count(), 1u);
  EXPECT_EQ(c.argument_count(), 1u);
  const auto& e = c.events_of("d1").at(0);
  EXPECT_EQ(e.trigger.event_type, "transport.person");
  EXPECT_EQ(e.trigger.span, (Span{2, 2}));
  ASSERT_TRUE(e.spans_for("passenger"));
  EXPECT_EQ(e.spans_for("passenger")->at(0), (Span{0, 0}));
  EXPECT_EQ(e.raw_roles.at("passenger"), "evt001arg02passenger");
  EXPECT_EQ(c.documents[0].split, Split::kTrain);
}

TEST(Corpus, EmptyInput) {
  const auto c = load_string("");
  EXPECT_TRUE(c.documents.empty());
  EXPECT_EQ(c.event_count(), 0u);
}

TEST(Corpus, MalformedJsonNamesLine) {
  try {
    load_string(std::string(kLine) + "\n{not json\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Corpus, OutOfBoundsSpanNamesDocKey) {
  std::string bad = kLine;
  bad.replace(bad.find("[0, 0]"), 6, "[0, 9]");
  try {
    load_string(bad);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("d1"), std::string::npos);
  }
}

TEST(Corpus, SchemaDriftIsFormatError) {
  std::string drift = kLine;
  drift.replace(drift.find("gold_evt_links"), 14, "gold_links_v2");
  try {
    load_string(drift);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("expected RAMS JSON-lines keys"), std::string::npos);
  }
}

TEST(Corpus, MissingSplitIsFormatError) {
  std::string no_split = kLine;
  no_split.erase(no_split.find(R"("split": "train", )"), 18);
  EXPECT_THROW(load_string(no_split), FormatError);
  EXPECT_NO_THROW(load_string(no_split, Split::kDev));
}

TEST(Corpus, DuplicateDocKeyWithinSplit) {
  EXPECT_THROW(load_string(std::string(kLine) + "\n" + kLine), ValidationError);
}

TEST(Corpus, RoleNormalization) {
  EXPECT_EQ(normalize_role("evt089arg01victim"), "victim");
  EXPECT_EQ(normalize_role("evt043arg03place"), "place");
  EXPECT_EQ(normalize_role("victim"), "victim");
}

TEST(Corpus, ZeroTriggerDocumentKept) {
  const auto c = load_string(
      R"({"doc_key": "z", "split": "dev", "sentences": [["a"]], "evt_triggers": [], "gold_evt_links": []})");
  ASSERT_EQ(c.documents.size(), 1u);
  EXPECT_TRUE(c.events_of("z").empty());
}

TEST(GroupEvents, FigureDocument) {
  const auto events = testing::figure_events();
  ASSERT_EQ(events.size(), 2u);
  EXPECT_EQ(events[0].trigger.event_type, "transport.person");
  EXPECT_EQ(events[1].trigger.event_type, "death.caused.by.violent.events");
  std::set<std::string> r0, r1;
  for (const auto& [r, s] : events[0].arguments) r0.insert(r);
  for (const auto& [r, s] : events[1].arguments) r1.insert(r);
  EXPECT_EQ(r0, (std::set<std::string>{"transporter", "passenger", "origin"}));
  EXPECT_EQ(r1, (std::set<std::string>{"killer", "victim", "place"}));
}

TEST(GroupEvents, NoLinks) {
  const auto events = group_events(testing::figure_doc(), testing::figure_triggers(), {});
  ASSERT_EQ(events.size(), 2u);
  EXPECT_TRUE(events[0].arguments.empty());
  EXPECT_TRUE(events[1].arguments.empty());
}

TEST(GroupEvents, SharedRoleCollectsSpansInOrder) {
  std::vector<ArgumentLink> links = {{Span{11, 11}, Span{15, 15}, "victim"},
                                     {Span{11, 11}, Span{0, 0}, "victim"}};
  const auto events = group_events(testing::figure_doc(), testing::figure_triggers(), links);
  const auto* spans = events[1].spans_for("victim");
  ASSERT_TRUE(spans);
  EXPECT_EQ(*spans, (std::vector<Span>{{0, 0}, {15, 15}}));
}

TEST(GroupEvents, UnknownTriggerIsIntegrityError) {
  std::vector<ArgumentLink> links = {{Span{3, 3}, Span{0, 0}, "victim"}};
  EXPECT_THROW(group_events(testing::figure_doc(), testing::figure_triggers(), links), IntegrityError);
}

// Property: write then load reproduces the corpus, for several generated corpora.
TEST(CorpusProperty, SerializeRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    synthetic::Options opts;
    opts.train_docs = 5;
    opts.dev_docs = 2;
    opts.test_docs = 2;
    opts.seed = seed;
    const auto corpus = synthetic::generate(opts);
    std::stringstream ss;
    write_rams(ss, corpus);
    const auto reloaded = load_rams_stream(ss, std::nullopt);
    ASSERT_EQ(reloaded, corpus) << "seed " << seed;
  }
}

TEST(CorpusProperty, SpansIndexIntoDocument) {
  synthetic::Options opts;
  opts.train_docs = 30;
  const auto corpus = synthetic::generate(opts);
  for (const auto& d : corpus.documents) {
    for (const auto& e : corpus.events_of(d.doc_key)) {
      EXPECT_TRUE(e.trigger.span.valid_for(d.size()));
      for (const auto& [r, spans] : e.arguments) {
        for (const auto& s : spans) EXPECT_TRUE(s.valid_for(d.size()));
      }
    }
  }
}

TEST(CorpusProperty, Deterministic) {
  EXPECT_EQ(load_string(kLine), load_string(kLine));
}

TEST(Corpus, LoadFromFileUsesFilenameSplit) {
  const auto dir = std::filesystem::temp_directory_path() / "eae_corpus_test";
  std::filesystem::create_directories(dir);
  std::string no_split = kLine;
  no_split.erase(no_split.find(R"("split": "train", )"), 18);
  std::ofstream(dir / "dev.jsonlines") << no_split << '\n';
  const auto c = load_rams(dir / "dev.jsonlines");
  EXPECT_EQ(c.documents.at(0).split, Split::kDev);
  EXPECT_THROW(load_rams(dir / "missing.jsonlines"), PathError);
}

TEST(Ontology, DeriveUsesArgumentNumbers) {
  CorpusSplit c = testing::figure_corpus();
  const auto o = Ontology::derive(c);
  EXPECT_EQ(o.roles_for("transport.person"), (std::vector<std::string>{"transporter", "passenger", "origin"}));
  EXPECT_EQ(o.roles_for("death.caused.by.violent.events"),
            (std::vector<std::string>{"killer", "victim", "place"}));
  EXPECT_THROW(o.roles_for("nope"), OntologyError);
}

TEST(Ontology, SaveLoadRoundTrip) {
  const auto o = testing::figure_ontology();
  const auto path = std::filesystem::temp_directory_path() / "eae_ontology_test.tsv";
  o.save(path);
  EXPECT_EQ(Ontology::load(path), o);
}

}  // namespace
}  // namespace eae
