#include <gtest/gtest.h>

#include "eae/prompting.hpp"
#include "eae/synthetic.hpp"
#include "figure_snapshots.hpp"
#include "fixtures.hpp"

namespace eae {
namespace {

using testing::figure_doc;
using testing::figure_events;
using testing::figure_ontology;

TEST(RoleQuestion, MentionsTrigger) {
  EXPECT_EQ(build_role_question("transporter", "transported").text,
            "What is the transporter in the event triggered by 'transported'?");
}

TEST(RoleQuestion, NoTriggerMention) {
  const auto p = build_role_question("victim", "");
  EXPECT_EQ(p.text, "What is the victim in the event?");
  EXPECT_EQ(p.slot_text("victim"), "victim");
  EXPECT_EQ(p.slots.size(), 1u);
}

TEST(RoleQuestion, Deterministic) {
  EXPECT_EQ(build_role_question("victim", "killed").text, build_role_question("victim", "killed").text);
}

TEST(RoleQuestion, EmptyRoleRejected) { EXPECT_THROW(build_role_question("", "x"), UsageError); }

TEST(MultiRole, EmptyClues) {
  const auto events = figure_events();
  const auto p = build_multirole_template(events[0], figure_ontology(), "transporter", ClueMap{});
  EXPECT_EQ(p.text,
            "What is the transporter in the event? "
            "transporter is [none]; passenger is [none]; origin is [none]");
  EXPECT_EQ(p.slots.size(), 3u);
  for (const auto& [role, range] : p.slots) EXPECT_EQ(p.slot_text(role), "[none]");
}

TEST(MultiRole, ClueFillsSlot) {
  ClueMap clues;
  clues.set("passenger", "Gretta");
  const auto p = build_multirole_template(figure_events()[0], figure_ontology(), "transporter", clues);
  EXPECT_EQ(p.slot_text("passenger"), "Gretta");
  EXPECT_EQ(p.slot_text("transporter"), "[none]");
  EXPECT_EQ(p.slot_text("origin"), "[none]");
}

TEST(MultiRole, TargetClueIgnored) {
  ClueMap clues;
  clues.set("transporter", "the militia");
  const auto p = build_multirole_template(figure_events()[0], figure_ontology(), "transporter", clues);
  EXPECT_EQ(p.slot_text("transporter"), "[none]");
  EXPECT_EQ(p.text.find("the militia"), std::string::npos);
}

TEST(MultiRole, UnknownRoleIsOntologyError) {
  EXPECT_THROW(build_multirole_template(figure_events()[0], figure_ontology(), "victim", ClueMap{}),
               OntologyError);
}

TEST(MultiEvent, FigureCeilingTargetsVictim) {
  const auto doc = figure_doc();
  const auto events = figure_events();
  const auto clues = derive_gold_clues(doc, events, 1, "victim");
  const auto p = build_multievent_template(doc, events, figure_ontology(), 1, "victim", clues);
  EXPECT_EQ(p.event_slots.size(), 2u);
  int placeholders = 0;
  for (const auto& slots : p.event_slots) {
    for (const auto& [role, r] : slots) {
      if (p.text.substr(r.begin, r.end - r.begin) == kPlaceholder) ++placeholders;
    }
  }
  EXPECT_EQ(placeholders, 1);
  EXPECT_EQ(p.slot_text("victim"), "[none]");
  EXPECT_NE(p.text.find("transport.person triggered by 'transported'"), std::string::npos);
  EXPECT_NE(p.text.find("death.caused.by.violent.events triggered by 'killed'"), std::string::npos);
}

TEST(MultiEvent, SingleEventDegeneratesToPrefixedMultiRole) {
  const auto doc = figure_doc();
  const std::vector<EventInstance> one = {figure_events()[0]};
  ClueMap clues;
  clues.set("origin", "Lebanon");
  const auto me = build_multievent_template(doc, one, figure_ontology(), 0, "passenger", {clues});
  auto mr = build_multirole_template(one[0], figure_ontology(), "passenger", clues, "transported");
  mr.text.insert(mr.body_begin, "transport.person triggered by 'transported': ");
  EXPECT_EQ(me.text, mr.text);
}

TEST(MultiEvent, EmptyCluesAllPlaceholders) {
  const auto doc = figure_doc();
  const auto events = figure_events();
  const auto p = build_multievent_template(doc, events, figure_ontology(), 0, "origin", {ClueMap{}, ClueMap{}});
  for (const auto& slots : p.event_slots) {
    for (const auto& [role, r] : slots) EXPECT_EQ(p.text.substr(r.begin, r.end - r.begin), "[none]");
  }
}

TEST(MultiEvent, IndexOutOfRange) {
  const auto doc = figure_doc();
  const auto events = figure_events();
  EXPECT_THROW(build_multievent_template(doc, events, figure_ontology(), 2, "victim", {ClueMap{}, ClueMap{}}),
               UsageError);
}

TEST(PromptTesting, AppendsGold) {
  EXPECT_EQ(build_prompt_testing("victim", {"Hassan Nasrallah"}).text,
            "What is the victim in the event? The victim is Hassan Nasrallah.");
  EXPECT_EQ(build_prompt_testing("victim", {}).text, "What is the victim in the event? The victim is [none].");
  EXPECT_EQ(build_prompt_testing("victim", {"A", "B"}).text, "What is the victim in the event? The victim is A, B.");
}

TEST(Clues, GoldSingleEvent) {
  const auto clues = derive_gold_clues(figure_doc(), figure_events()[0], "transporter");
  EXPECT_FALSE(clues.known("transporter"));
  EXPECT_EQ(clues.get("passenger"), "Gretta");
  EXPECT_EQ(clues.get("origin"), "Lebanon");
}

TEST(Clues, NoGoldArguments) {
  EventInstance e;
  e.trigger = figure_events()[0].trigger;
  const auto clues = derive_gold_clues(figure_doc(), e, "transporter");
  EXPECT_TRUE(clues.empty());
}

TEST(Clues, GoldMultiEvent) {
  const auto maps = derive_gold_clues(figure_doc(), figure_events(), 1, "victim");
  ASSERT_EQ(maps.size(), 2u);
  EXPECT_EQ(maps[0].entries().size(), 3u);
  EXPECT_EQ(maps[1].entries().size(), 2u);
  EXPECT_FALSE(maps[1].known("victim"));
}

TEST(Clues, FirstSpanInDocumentOrder) {
  auto events = figure_events();
  events[0].arguments["passenger"] = {Span{12, 13}, Span{0, 0}};
  const auto clues = derive_gold_clues(figure_doc(), events[0], "origin");
  EXPECT_EQ(clues.get("passenger"), "Gretta");
}

TEST(Clues, Predicted) {
  RolePredictions pred = {{"passenger", {Span{0, 0}}}, {"transporter", {Span{6, 7}}}};
  const auto clues = derive_predicted_clues(figure_doc(), pred, "transporter");
  EXPECT_EQ(clues.get("passenger"), "Gretta");
  EXPECT_FALSE(clues.known("transporter"));
}

// Fixed renderings of all six variants on the two-event fixture.
TEST(Snapshot, AllVariants) {
  for (const auto& snap : testing::figure_snapshots()) {
    EXPECT_EQ(testing::render_figure(snap), snap.expected) << variant_name(snap.variant);
  }
}

// Properties over generated documents: slot integrity, ceiling separation,
// monotone information, determinism.
TEST(PromptProperty, GeneratedCorpora) {
  const auto ontology = synthetic::ontology();
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    synthetic::Options opts;
    opts.train_docs = 8;
    opts.second_event_rate = 0.7;
    opts.seed = seed;
    const auto corpus = synthetic::generate(opts);
    for (const auto& doc : corpus.documents) {
      const auto& events = corpus.events_of(doc.doc_key);
      for (std::size_t ei = 0; ei < events.size(); ++ei) {
        for (const auto& role : ontology.roles_for(events[ei].trigger.event_type)) {
          std::vector<std::string> golds;
          if (const auto* s = events[ei].spans_for(role)) {
            for (const auto& sp : *s) golds.push_back(doc.surface(sp));
          }
          for (auto v : all_variants()) {
            PromptRequest req{&doc, &events, ei, role, v, TriggerMarking::kMarkers, nullptr};
            const auto p = build_prompt(req, ontology);
            ASSERT_EQ(p.text, build_prompt(req, ontology).text);
            ASSERT_TRUE(p.slots.count(role));
            for (const auto& slots : p.event_slots) {
              for (const auto& [r, range] : slots) ASSERT_LE(range.end, p.text.size());
            }
            if (is_ceiling(v)) {
              ASSERT_EQ(p.slot_text(role), kPlaceholder);
              for (const auto& g : golds) ASSERT_EQ(p.text.find(g), std::string::npos) << p.text;
            }
            if (v == PromptVariant::kPromptTesting) {
              for (const auto& g : golds) ASSERT_NE(p.text.find(g), std::string::npos) << p.text;
            }
          }
          // Slot integrity on the ceiling template: each slot holds its clue.
          const auto clues = derive_gold_clues(doc, events[ei], role);
          const auto mr = build_multirole_template(events[ei], ontology, role, clues);
          for (const auto& [r, range] : mr.slots) {
            const std::string expect = (r != role && clues.known(r)) ? clues.get(r) : std::string(kPlaceholder);
            ASSERT_EQ(mr.slot_text(r), expect);
          }
          // Monotone information: every event's clause body appears in the multi-event text.
          const auto multi_clues = derive_gold_clues(doc, events, ei, role);
          const auto me = build_multievent_template(doc, events, ontology, ei, role, multi_clues);
          for (std::size_t k = 0; k < events.size(); ++k) {
            const auto& rk = ontology.roles_for(events[k].trigger.event_type);
            const std::string& target = k == ei ? role : rk.front();
            ClueMap ck = multi_clues[k];
            if (k != ei) ck.clear(target);
            auto body = build_multirole_template(events[k], ontology, target, ck);
            if (k != ei) {
              // Non-target events carry every clue, the first role included.
              if (multi_clues[k].known(target)) continue;
            }
            ASSERT_NE(me.text.find(body.text.substr(body.body_begin)), std::string::npos);
          }
        }
      }
    }
  }
}

TEST(Assemble, MarkersShiftIndices) {
  const auto doc = figure_doc();
  TriggerMention t{Span{7, 7}, "x"};
  const auto seq = assemble_input(build_role_question("r", ""), doc, t, TriggerMarking::kMarkers);
  EXPECT_EQ(seq.doc_tokens.size(), doc.tokens.size() + 2);
  EXPECT_EQ(seq.remap[6], 6);
  EXPECT_EQ(seq.remap[7], 8);
  EXPECT_EQ(seq.remap[8], 10);
  EXPECT_EQ(seq.doc_tokens[7], "<t>");
  EXPECT_EQ(seq.doc_tokens[9], "</t>");
  EXPECT_EQ(seq.trigger, (Span{8, 8}));
}

TEST(Assemble, SegmentVectorSumsToTriggerLength) {
  const auto doc = figure_doc();
  TriggerMention t{Span{3, 5}, "x"};
  const auto seq = assemble_input(build_role_question("r", ""), doc, t, TriggerMarking::kSegment);
  int sum = 0;
  for (int s : seq.segment) sum += s;
  EXPECT_EQ(sum, 3);
  EXPECT_EQ(seq.segment[3], 1);
  EXPECT_EQ(seq.segment[2], 0);
}

TEST(Assemble, InPromptLeavesDocumentUntouched) {
  const auto doc = figure_doc();
  const auto t = figure_events()[0].trigger;
  const auto seq = assemble_input(build_role_question("r", "transported"), doc, t, TriggerMarking::kInPrompt);
  EXPECT_EQ(seq.doc_tokens, doc.tokens);
  EXPECT_THROW(assemble_input(build_role_question("r", ""), doc, t, TriggerMarking::kInPrompt), UsageError);
}

TEST(Assemble, MultiTokenTriggerMarkers) {
  const auto doc = figure_doc();
  TriggerMention t{Span{12, 13}, "x"};
  const auto seq = assemble_input(build_role_question("r", ""), doc, t, TriggerMarking::kMarkers);
  EXPECT_EQ(seq.doc_tokens[12], "<t>");
  EXPECT_EQ(seq.doc_tokens[15], "</t>");
  EXPECT_EQ(seq.trigger, (Span{13, 14}));
}

// Property: remapped gold spans select the original surface tokens.
TEST(AssembleProperty, MarkerRemapPreservesSurface) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    synthetic::Options opts;
    opts.train_docs = 10;
    opts.seed = seed;
    const auto corpus = synthetic::generate(opts);
    for (const auto& doc : corpus.documents) {
      for (const auto& e : corpus.events_of(doc.doc_key)) {
        const auto seq = assemble_input(build_role_question("r", ""), doc, e.trigger, TriggerMarking::kMarkers);
        for (const auto& [r, spans] : e.arguments) {
          for (const auto& s : spans) {
            for (int i = s.start; i <= s.end; ++i) {
              ASSERT_EQ(seq.doc_tokens[static_cast<std::size_t>(seq.remap[static_cast<std::size_t>(i)])],
                        doc.tokens[static_cast<std::size_t>(i)]);
            }
          }
        }
      }
    }
  }
}

TEST(Variant, ParseRoundTrip) {
  for (auto v : all_variants()) EXPECT_EQ(parse_variant(variant_name(v)), v);
  EXPECT_THROW(parse_variant("bogus"), UsageError);
  EXPECT_THROW(parse_marking("bogus"), UsageError);
}

}  // namespace
}  // namespace eae
