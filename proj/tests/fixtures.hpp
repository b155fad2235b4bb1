#pragma once

#include <string>
#include <vector>

#include "eae/corpus.hpp"
#include "eae/ontology.hpp"

namespace eae::testing {

// Two events in one document: a transport.person event triggered by
// "transported" and a death.caused.by.violent.events event triggered by "killed".
inline Document figure_doc() {
  Document d;
  d.doc_key = "fig1";
  d.split = Split::kTest;
  d.sentences = {{"Gretta", "was", "transported", "from", "Lebanon", "by", "the", "militia", "."},
                 {"Hezbollah", "fighters", "killed", "Hassan", "Nasrallah", "in", "Beirut", "."}};
  for (const auto& s : d.sentences) d.tokens.insert(d.tokens.end(), s.begin(), s.end());
  return d;
}

inline std::vector<TriggerMention> figure_triggers() {
  return {{Span{2, 2}, "transport.person"}, {Span{11, 11}, "death.caused.by.violent.events"}};
}

inline std::vector<ArgumentLink> figure_links() {
  return {{Span{2, 2}, Span{6, 7}, "evt001arg01transporter"},
          {Span{2, 2}, Span{0, 0}, "evt001arg02passenger"},
          {Span{2, 2}, Span{4, 4}, "evt001arg03origin"},
          {Span{11, 11}, Span{9, 10}, "evt002arg01killer"},
          {Span{11, 11}, Span{12, 13}, "evt002arg02victim"},
          {Span{11, 11}, Span{15, 15}, "evt002arg03place"}};
}

inline std::vector<EventInstance> figure_events() {
  return group_events(figure_doc(), figure_triggers(), figure_links());
}

inline Ontology figure_ontology() {
  Ontology o;
  o.add("transport.person", {"transporter", "passenger", "origin"});
  o.add("death.caused.by.violent.events", {"killer", "victim", "place"});
  return o;
}

inline CorpusSplit figure_corpus() {
  CorpusSplit c;
  c.documents.push_back(figure_doc());
  c.events["fig1"] = figure_events();
  return c;
}

}  // namespace eae::testing
