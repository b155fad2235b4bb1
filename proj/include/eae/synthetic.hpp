#pragma once

// Small seeded generator of RAMS-shaped documents for smoke tests and demos.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "eae/corpus.hpp"
#include "eae/ontology.hpp"
#include "eae/rng.hpp"

namespace eae::synthetic {

struct EventSchema {
  std::string type;
  int number;                       // RAMS-style evtNNN id
  std::vector<std::string> roles;   // ontology order
  std::vector<std::string> templates;  // "{role}" slots, "{*word}" marks the trigger
};

inline const std::vector<EventSchema>& schemas() {
  static const std::vector<EventSchema> kSchemas = {
      {"transport.person", 1, {"transporter", "passenger", "origin"},
       {"{transporter} {*transported} {passenger} out of {origin} .",
        "{passenger} was {*moved} from {origin} by {transporter} .",
        "{transporter} {*evacuated} {passenger} overnight ."}},
      {"death.caused.by.violent.events", 2, {"killer", "victim", "place"},
       {"{killer} {*killed} {victim} in {place} .",
        "{victim} was {*assassinated} by {killer} near {place} .",
        "{victim} {*died} after an attack in {place} ."}},
      {"conflict.attack", 3, {"attacker", "target", "place"},
       {"{attacker} {*attacked} {target} in {place} .",
        "{target} came under {*fire} from {attacker} ."}},
      {"transaction.transfermoney", 4, {"giver", "recipient", "money"},
       {"{giver} {*paid} {money} to {recipient} .",
        "{recipient} {*received} {money} from {giver} ."}},
  };
  return kSchemas;
}

inline Ontology ontology() {
  Ontology o;
  for (const auto& s : schemas()) o.add(s.type, s.roles);
  return o;
}

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

inline const std::vector<std::string>& fillers() {
  static const std::vector<std::string> kFillers = {
      "Officials said the situation remained tense .",
      "The report could not be independently verified .",
      "Local media carried the story on Tuesday .",
      "Residents described a quiet morning before the news spread .",
      "Analysts expect further statements later this week .",
  };
  return kFillers;
}

inline const std::map<std::string, std::vector<std::string>>& pools() {
  static const std::map<std::string, std::vector<std::string>> kPools = {
      {"person", {"Gretta", "Hassan Nasrallah", "Omar Khalid", "Maria Lopez", "John Carter", "Aylin Demir",
                  "Pavel Ivanov", "Sara Haddad", "Lee Min", "Tom Baker", "Nadia Rahman", "Ivo Petrov"}},
      {"group", {"the militia", "rebel fighters", "the army", "police officers", "a gunman", "the smugglers",
                 "security forces", "the insurgents"}},
      {"place", {"Aleppo", "Mosul", "Kabul", "the capital", "Beirut", "Tripoli", "the border town", "Homs"}},
      {"money", {"$ 5 million", "20,000 dollars", "a large sum", "$ 300", "two million euros"}},
  };
  return kPools;
}

inline const std::string& pool_for(const std::string& role) {
  static const std::map<std::string, std::string> kRolePool = {
      {"transporter", "group"}, {"passenger", "person"}, {"origin", "place"}, {"killer", "group"},
      {"victim", "person"},     {"place", "place"},      {"attacker", "group"}, {"target", "person"},
      {"giver", "person"},      {"recipient", "group"},  {"money", "money"}};
  return kRolePool.at(role);
}

}  // namespace detail

struct Options {
  int train_docs = 20;
  int dev_docs = 0;
  int test_docs = 0;
  double second_event_rate = 0.4;
  int max_fillers = 2;
  std::uint64_t seed = 7;
};

// Generates documents whose events are rendered from fixed sentence templates.
inline CorpusSplit generate(const Options& opts) {
  Rng rng(opts.seed);
  CorpusSplit corpus;
  int counter = 0;
  auto make_doc = [&](Split split) {
    Document doc;
    doc.doc_key = std::string("synth_") + split_name(split) + "_" + std::to_string(counter++);
    doc.split = split;
    std::vector<TriggerMention> triggers;
    std::vector<ArgumentLink> links;
    std::vector<std::string> used;

    const int n_events = rng.bernoulli(opts.second_event_rate) ? 2 : 1;
    std::vector<std::vector<std::string>> sentences;
    std::vector<std::size_t> event_schema;
    for (int e = 0; e < n_events; ++e) event_schema.push_back(rng.below(schemas().size()));
    const int n_fill = static_cast<int>(rng.below(static_cast<std::uint64_t>(opts.max_fillers) + 1));
    // Order: fillers and events interleaved at random.
    std::vector<int> plan;  // -1 filler, else event index
    for (int f = 0; f < n_fill; ++f) plan.push_back(-1);
    for (int e = 0; e < n_events; ++e) plan.push_back(e);
    rng.shuffle(plan);

    int offset = 0;
    for (int item : plan) {
      if (item < 0) {
        auto toks = detail::split_ws(rng.pick(detail::fillers()));
        offset += static_cast<int>(toks.size());
        sentences.push_back(std::move(toks));
        continue;
      }
      const EventSchema& schema = schemas()[event_schema[static_cast<std::size_t>(item)]];
      const std::string& tpl = rng.pick(schema.templates);
      std::vector<std::string> sent;
      Span trigger_span{};
      std::vector<std::pair<std::string, Span>> args;
      for (const auto& piece : detail::split_ws(tpl)) {
        if (piece.size() > 2 && piece.front() == '{' && piece.back() == '}') {
          const std::string name = piece.substr(1, piece.size() - 2);
          if (name[0] == '*') {
            const int at = offset + static_cast<int>(sent.size());
            trigger_span = Span{at, at};
            sent.push_back(name.substr(1));
            continue;
          }
          const auto& pool = detail::pools().at(detail::pool_for(name));
          std::string filler;
          for (int tries = 0; tries < 32; ++tries) {
            filler = rng.pick(pool);
            if (std::find(used.begin(), used.end(), filler) == used.end()) break;
          }
          used.push_back(filler);
          const auto words = detail::split_ws(filler);
          const int at = offset + static_cast<int>(sent.size());
          args.emplace_back(name, Span{at, at + static_cast<int>(words.size()) - 1});
          sent.insert(sent.end(), words.begin(), words.end());
        } else {
          sent.push_back(piece);
        }
      }
      if (!sent.empty() && std::islower(static_cast<unsigned char>(sent[0][0]))) {
        sent[0][0] = static_cast<char>(std::toupper(static_cast<unsigned char>(sent[0][0])));
      }
      triggers.push_back(TriggerMention{trigger_span, schema.type});
      for (const auto& [role, span] : args) {
        const auto pos = std::find(schema.roles.begin(), schema.roles.end(), role) - schema.roles.begin();
        char label[64];
        std::snprintf(label, sizeof label, "evt%03darg%02d%s", schema.number, static_cast<int>(pos) + 1,
                      role.c_str());
        links.push_back(ArgumentLink{trigger_span, span, label});
      }
      offset += static_cast<int>(sent.size());
      sentences.push_back(std::move(sent));
    }
    for (const auto& s : sentences) doc.tokens.insert(doc.tokens.end(), s.begin(), s.end());
    doc.sentences = std::move(sentences);
    // Events in document order of their triggers.
    std::vector<std::size_t> idx(triggers.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return triggers[a].span < triggers[b].span; });
    std::vector<TriggerMention> sorted;
    for (auto i : idx) sorted.push_back(triggers[i]);
    corpus.events[doc.doc_key] = group_events(doc, sorted, links);
    corpus.documents.push_back(std::move(doc));
  };
  for (int i = 0; i < opts.train_docs; ++i) make_doc(Split::kTrain);
  for (int i = 0; i < opts.dev_docs; ++i) make_doc(Split::kDev);
  for (int i = 0; i < opts.test_docs; ++i) make_doc(Split::kTest);
  return corpus;
}

// Copy of the given split relabeled as another (for train-on-dev overfit checks).
inline CorpusSplit relabel(const CorpusSplit& corpus, Split from, Split to) {
  CorpusSplit out;
  for (const auto& d : corpus.documents) {
    if (d.split != from) continue;
    Document copy = d;
    copy.split = to;
    out.documents.push_back(copy);
    out.events[d.doc_key] = corpus.events_of(d.doc_key);
  }
  return out;
}

}  // namespace eae::synthetic
