#pragma once

// Prompt rendering for the six query variants and assembly of prompt + document.
//
// Fixed wordings:
//   question      What is the <role> in the event triggered by '<trigger>'?
//                 What is the <role> in the event?          (no trigger mention)
//   role clause   <role> is <clue | [none]>                  joined by "; "
//   event block   <event_type> triggered by '<trigger>': <clauses>, joined by " | "
//   gold append   " The <role> is <gold, gold, ...>."
// Template variants put the question first so the target role is always
// named in the text; `body_begin` marks where the clause body starts.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "eae/corpus.hpp"
#include "eae/error.hpp"
#include "eae/ontology.hpp"

namespace eae {

inline constexpr std::string_view kPlaceholder = "[none]";
inline constexpr std::string_view kClauseSeparator = "; ";
inline constexpr std::string_view kEventSeparator = " | ";
inline constexpr std::string_view kTriggerOpen = "<t>";
inline constexpr std::string_view kTriggerClose = "</t>";

enum class PromptVariant { kRole, kMRole, kMRoleCeiling, kMEvent, kMEventCeiling, kPromptTesting };

inline const std::vector<PromptVariant>& all_variants() {
  static const std::vector<PromptVariant> kAll = {
      PromptVariant::kRole,   PromptVariant::kMRole,         PromptVariant::kMRoleCeiling,
      PromptVariant::kMEvent, PromptVariant::kMEventCeiling, PromptVariant::kPromptTesting};
  return kAll;
}

inline const char* variant_name(PromptVariant v) {
  switch (v) {
    case PromptVariant::kRole: return "role";
    case PromptVariant::kMRole: return "mrole";
    case PromptVariant::kMRoleCeiling: return "mrole-ceiling";
    case PromptVariant::kMEvent: return "mevent";
    case PromptVariant::kMEventCeiling: return "mevent-ceiling";
    case PromptVariant::kPromptTesting: return "prompt-testing";
  }
  return "role";
}

// Row label used in result grids.
inline const char* variant_label(PromptVariant v) {
  switch (v) {
    case PromptVariant::kRole: return "R-Prompt";
    case PromptVariant::kMRole: return "mRole-Prompt";
    case PromptVariant::kMRoleCeiling: return "mR-Prompt (ceiling)";
    case PromptVariant::kMEvent: return "mEvent-Prompt";
    case PromptVariant::kMEventCeiling: return "mE-Prompt (ceiling)";
    case PromptVariant::kPromptTesting: return "Prompt testing";
  }
  return "";
}

inline PromptVariant parse_variant(std::string_view s) {
  for (auto v : all_variants()) {
    if (s == variant_name(v)) return v;
  }
  throw UsageError("unknown prompt variant '" + std::string(s) +
                   "' (expected role, mrole, mrole-ceiling, mevent, mevent-ceiling, prompt-testing)");
}

inline bool is_ceiling(PromptVariant v) {
  return v == PromptVariant::kMRoleCeiling || v == PromptVariant::kMEventCeiling;
}

inline bool is_multi_event(PromptVariant v) {
  return v == PromptVariant::kMEvent || v == PromptVariant::kMEventCeiling;
}

inline bool uses_clues(PromptVariant v) {
  return v == PromptVariant::kMRole || v == PromptVariant::kMRoleCeiling || is_multi_event(v);
}

enum class TriggerMarking { kSegment, kMarkers, kInPrompt };

inline const char* marking_name(TriggerMarking m) {
  switch (m) {
    case TriggerMarking::kSegment: return "segment";
    case TriggerMarking::kMarkers: return "markers";
    case TriggerMarking::kInPrompt: return "inprompt";
  }
  return "markers";
}

inline TriggerMarking parse_marking(std::string_view s) {
  if (s == "segment") return TriggerMarking::kSegment;
  if (s == "markers") return TriggerMarking::kMarkers;
  if (s == "inprompt") return TriggerMarking::kInPrompt;
  throw UsageError("unknown trigger marking '" + std::string(s) +
                   "' (expected segment, markers, inprompt)");
}

// role -> clue text; a missing or empty entry is the "unknown" marker.
class ClueMap {
 public:
  ClueMap() = default;

  void set(const std::string& role, std::string text) { entries_[role] = std::move(text); }
  void clear(const std::string& role) { entries_.erase(role); }

  bool known(const std::string& role) const {
    auto it = entries_.find(role);
    return it != entries_.end() && !it->second.empty();
  }

  // Clue text, or the empty marker.
  std::string get(const std::string& role) const {
    auto it = entries_.find(role);
    return it == entries_.end() ? std::string() : it->second;
  }

  const std::map<std::string, std::string>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  bool operator==(const ClueMap&) const = default;

 private:
  std::map<std::string, std::string> entries_;
};

struct CharRange {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive

  bool operator==(const CharRange&) const = default;
};

struct PromptText {
  std::string text;
  // Slots of the target's own template (or the role word of a question).
  std::map<std::string, CharRange> slots;
  // Per-event slots for multi-event templates; one entry for single templates.
  std::vector<std::map<std::string, CharRange>> event_slots;
  std::string target_role;
  std::string trigger_surface;
  std::size_t body_begin = 0;

  std::string slot_text(const std::string& role) const {
    auto it = slots.find(role);
    if (it == slots.end()) return {};
    return text.substr(it->second.begin, it->second.end - it->second.begin);
  }
};

inline std::string trigger_surface(const Document& doc, const TriggerMention& t) {
  return doc.surface(t.span);
}

// Question for a single role. Mentions the trigger iff trigger_surface is nonempty.
inline PromptText build_role_question(const std::string& target_role,
                                      const std::string& trigger_surface) {
  if (target_role.empty()) throw UsageError("build_role_question: empty target role");
  PromptText p;
  p.text = "What is the ";
  CharRange r{p.text.size(), 0};
  p.text += target_role;
  r.end = p.text.size();
  if (trigger_surface.empty()) {
    p.text += " in the event?";
  } else {
    p.text += " in the event triggered by '" + trigger_surface + "'?";
  }
  p.slots[target_role] = r;
  p.event_slots.push_back(p.slots);
  p.target_role = target_role;
  p.trigger_surface = trigger_surface;
  p.body_begin = p.text.size();
  return p;
}

namespace detail {

// Appends "<role> is <fill>; ..." for every ontology role of the event type.
inline std::map<std::string, CharRange> append_clauses(std::string& text,
                                                       const std::vector<std::string>& roles,
                                                       const ClueMap& clues,
                                                       const std::string* target_role) {
  std::map<std::string, CharRange> slots;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    const auto& role = roles[i];
    if (i > 0) text += kClauseSeparator;
    text += role;
    text += " is ";
    std::string fill;
    if ((target_role == nullptr || role != *target_role) && clues.known(role)) {
      fill = clues.get(role);
    } else {
      fill = std::string(kPlaceholder);
    }
    CharRange r{text.size(), 0};
    text += fill;
    r.end = text.size();
    slots[role] = r;
  }
  return slots;
}

inline std::string event_prefix(const std::string& event_type, const std::string& trigger) {
  return event_type + " triggered by '" + trigger + "': ";
}

}  // namespace detail

// Question followed by one clause per ontology role. The target clause is
// always the placeholder, whatever the clue map holds.
inline PromptText build_multirole_template(const EventInstance& event, const Ontology& ontology,
                                           const std::string& target_role, const ClueMap& clues,
                                           const std::string& trigger_surface = {}) {
  if (!ontology.has_role(event.trigger.event_type, target_role)) {
    throw OntologyError("role '" + target_role + "' is not defined for event type '" +
                        event.trigger.event_type + "'");
  }
  PromptText p = build_role_question(target_role, trigger_surface);
  p.text += ' ';
  p.body_begin = p.text.size();
  p.slots = detail::append_clauses(p.text, ontology.roles_for(event.trigger.event_type), clues,
                                   &target_role);
  p.event_slots = {p.slots};
  return p;
}

// Question naming the target trigger, then one event block per event.
inline PromptText build_multievent_template(const Document& doc,
                                            const std::vector<EventInstance>& events,
                                            const Ontology& ontology, std::size_t target_event_index,
                                            const std::string& target_role,
                                            const std::vector<ClueMap>& clues_per_event) {
  if (target_event_index >= events.size()) {
    throw UsageError("build_multievent_template: target event index " +
                     std::to_string(target_event_index) + " out of range (" +
                     std::to_string(events.size()) + " events)");
  }
  if (clues_per_event.size() != events.size()) {
    throw UsageError("build_multievent_template: need one clue map per event");
  }
  const auto& target = events[target_event_index];
  if (!ontology.has_role(target.trigger.event_type, target_role)) {
    throw OntologyError("role '" + target_role + "' is not defined for event type '" +
                        target.trigger.event_type + "'");
  }
  PromptText p = build_role_question(target_role, trigger_surface(doc, target.trigger));
  p.text += ' ';
  p.body_begin = p.text.size();
  p.event_slots.clear();
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (i > 0) p.text += kEventSeparator;
    p.text += detail::event_prefix(e.trigger.event_type, trigger_surface(doc, e.trigger));
    const std::string* tr = i == target_event_index ? &target_role : nullptr;
    p.event_slots.push_back(detail::append_clauses(p.text, ontology.roles_for(e.trigger.event_type),
                                                   clues_per_event[i], tr));
  }
  p.slots = p.event_slots[target_event_index];
  return p;
}

// The role question with the target's own gold arguments appended.
inline PromptText build_prompt_testing(const std::string& target_role,
                                       const std::vector<std::string>& gold_arguments,
                                       const std::string& trigger_surface = {}) {
  PromptText p = build_role_question(target_role, trigger_surface);
  p.text += " The " + target_role + " is ";
  if (gold_arguments.empty()) {
    p.text += kPlaceholder;
  } else {
    for (std::size_t i = 0; i < gold_arguments.size(); ++i) {
      if (i > 0) p.text += ", ";
      p.text += gold_arguments[i];
    }
  }
  p.text += '.';
  return p;
}

// Gold clues: every role but the target gets its first gold span's surface.
inline ClueMap derive_gold_clues(const Document& doc, const EventInstance& event,
                                 const std::string& target_role) {
  ClueMap clues;
  for (const auto& [role, spans] : event.arguments) {
    if (role == target_role || spans.empty()) continue;
    clues.set(role, doc.surface(*std::min_element(spans.begin(), spans.end())));
  }
  return clues;
}

// Multi-event gold clues: only the target event's target role is withheld.
inline std::vector<ClueMap> derive_gold_clues(const Document& doc,
                                              const std::vector<EventInstance>& events,
                                              std::size_t target_event_index,
                                              const std::string& target_role) {
  std::vector<ClueMap> out;
  out.reserve(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    out.push_back(derive_gold_clues(doc, events[i], i == target_event_index ? target_role : ""));
  }
  return out;
}

// role -> predicted spans for one event, from an earlier model pass.
using RolePredictions = std::map<std::string, std::vector<Span>>;

inline ClueMap derive_predicted_clues(const Document& doc, const RolePredictions& predicted,
                                      const std::string& target_role) {
  ClueMap clues;
  for (const auto& [role, spans] : predicted) {
    if (role == target_role || spans.empty()) continue;
    clues.set(role, doc.surface(*std::min_element(spans.begin(), spans.end())));
  }
  return clues;
}

inline std::vector<ClueMap> derive_predicted_clues(const Document& doc,
                                                   const std::vector<RolePredictions>& predicted,
                                                   std::size_t target_event_index,
                                                   const std::string& target_role) {
  std::vector<ClueMap> out;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    out.push_back(derive_predicted_clues(doc, predicted[i], i == target_event_index ? target_role : ""));
  }
  return out;
}

// Prompt plus document under one trigger-marking strategy.
struct AssembledSequence {
  std::string prompt;
  std::vector<std::string> doc_tokens;
  // original document index -> index in doc_tokens
  std::vector<int> remap;
  // per doc_tokens entry; 1 on trigger tokens under segment marking, else 0
  std::vector<int> segment;
  Span trigger;  // in doc_tokens coordinates
  TriggerMarking marking = TriggerMarking::kMarkers;
  int original_length = 0;

  bool has_segment_vector() const { return marking == TriggerMarking::kSegment; }

  bool is_marker(int assembled_index) const {
    const auto& t = doc_tokens[static_cast<std::size_t>(assembled_index)];
    return marking == TriggerMarking::kMarkers && (t == kTriggerOpen || t == kTriggerClose) &&
           (assembled_index == trigger.start - 1 || assembled_index == trigger.end + 1);
  }
};

inline AssembledSequence assemble_input(const PromptText& prompt, const Document& doc,
                                        const TriggerMention& trigger, TriggerMarking marking) {
  const int n = doc.size();
  if (!trigger.span.valid_for(n)) {
    throw UsageError("assemble_input: trigger span outside document '" + doc.doc_key + "'");
  }
  AssembledSequence seq;
  seq.prompt = prompt.text;
  seq.marking = marking;
  seq.original_length = n;
  seq.remap.resize(static_cast<std::size_t>(n));
  switch (marking) {
    case TriggerMarking::kMarkers: {
      seq.doc_tokens.reserve(static_cast<std::size_t>(n) + 2);
      for (int i = 0; i < n; ++i) {
        if (i == trigger.span.start) seq.doc_tokens.emplace_back(kTriggerOpen);
        seq.remap[static_cast<std::size_t>(i)] = static_cast<int>(seq.doc_tokens.size());
        seq.doc_tokens.push_back(doc.tokens[static_cast<std::size_t>(i)]);
        if (i == trigger.span.end) seq.doc_tokens.emplace_back(kTriggerClose);
      }
      seq.trigger = Span{trigger.span.start + 1, trigger.span.end + 1};
      seq.segment.assign(seq.doc_tokens.size(), 0);
      break;
    }
    case TriggerMarking::kSegment:
    case TriggerMarking::kInPrompt: {
      seq.doc_tokens = doc.tokens;
      for (int i = 0; i < n; ++i) seq.remap[static_cast<std::size_t>(i)] = i;
      seq.trigger = trigger.span;
      seq.segment.assign(seq.doc_tokens.size(), 0);
      if (marking == TriggerMarking::kSegment) {
        for (int i = trigger.span.start; i <= trigger.span.end; ++i) {
          seq.segment[static_cast<std::size_t>(i)] = 1;
        }
      } else if (prompt.text.find(doc.surface(trigger.span)) == std::string::npos) {
        throw UsageError("assemble_input: inprompt marking requires the prompt to mention '" +
                         doc.surface(trigger.span) + "'");
      }
      break;
    }
  }
  return seq;
}

// Prompt for one (event, role) query under a variant. `clue_source` supplies
// predicted clues for non-ceiling template variants; ceilings always use gold.
struct PromptRequest {
  const Document* doc = nullptr;
  const std::vector<EventInstance>* events = nullptr;
  std::size_t event_index = 0;
  std::string role;
  PromptVariant variant = PromptVariant::kRole;
  TriggerMarking marking = TriggerMarking::kMarkers;
  // Optional predicted clues (one entry per event of the document).
  const std::vector<RolePredictions>* predicted = nullptr;
};

inline PromptText build_prompt(const PromptRequest& req, const Ontology& ontology) {
  const Document& doc = *req.doc;
  const auto& events = *req.events;
  const EventInstance& event = events.at(req.event_index);
  const std::string trig =
      req.marking == TriggerMarking::kInPrompt ? trigger_surface(doc, event.trigger) : std::string();
  switch (req.variant) {
    case PromptVariant::kRole:
      return build_role_question(req.role, trig);
    case PromptVariant::kPromptTesting: {
      std::vector<std::string> golds;
      if (const auto* spans = event.spans_for(req.role)) {
        for (const auto& s : *spans) golds.push_back(doc.surface(s));
      }
      return build_prompt_testing(req.role, golds, trig);
    }
    case PromptVariant::kMRole:
    case PromptVariant::kMRoleCeiling: {
      ClueMap clues;
      if (req.variant == PromptVariant::kMRoleCeiling) {
        clues = derive_gold_clues(doc, event, req.role);
      } else if (req.predicted != nullptr) {
        clues = derive_predicted_clues(doc, req.predicted->at(req.event_index), req.role);
      }
      return build_multirole_template(event, ontology, req.role, clues, trig);
    }
    case PromptVariant::kMEvent:
    case PromptVariant::kMEventCeiling: {
      std::vector<ClueMap> clues(events.size());
      if (req.variant == PromptVariant::kMEventCeiling) {
        clues = derive_gold_clues(doc, events, req.event_index, req.role);
      } else if (req.predicted != nullptr) {
        clues = derive_predicted_clues(doc, *req.predicted, req.event_index, req.role);
      }
      return build_multievent_template(doc, events, ontology, req.event_index, req.role, clues);
    }
  }
  throw UsageError("unsupported variant");
}

}  // namespace eae
