#pragma once

// RAMS JSON-lines ingestion.
//
// Each line is one document:
//   doc_key        string
//   sentences      [[token, ...], ...]
//   evt_triggers   [[start, end, [[event_type, score], ...]], ...]
//   gold_evt_links [[[trig_start, trig_end], [arg_start, arg_end], role_label], ...]
// Optional and ignored: ent_spans, source_url, language_id, rel_triggers,
// gold_rel_links. `split` is honored when present; otherwise the split is
// taken from the file name (train/dev/test). Offsets are document-level
// inclusive token indices. Any other key, or a required key with the wrong
// shape, is a format error.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eae/error.hpp"

namespace eae {

using json = nlohmann::json;

struct Span {
  int start = 0;
  int end = 0;  // inclusive

  int length() const { return end - start + 1; }
  bool contains(int i) const { return start <= i && i <= end; }
  bool valid_for(int n_tokens) const { return 0 <= start && start <= end && end < n_tokens; }

  auto operator<=>(const Span&) const = default;
};

enum class Split { kTrain, kDev, kTest };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "train";
}

inline std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "dev" || s == "valid" || s == "validation") return Split::kDev;
  if (s == "test") return Split::kTest;
  return std::nullopt;
}

struct Document {
  std::string doc_key;
  std::vector<std::vector<std::string>> sentences;
  std::vector<std::string> tokens;
  Split split = Split::kTrain;

  int size() const { return static_cast<int>(tokens.size()); }

  std::string surface(Span s) const {
    std::string out;
    for (int i = s.start; i <= s.end; ++i) {
      if (i > s.start) out += ' ';
      out += tokens[static_cast<std::size_t>(i)];
    }
    return out;
  }

  bool operator==(const Document&) const = default;
};

struct TriggerMention {
  Span span;
  std::string event_type;

  bool operator==(const TriggerMention&) const = default;
};

struct EventInstance {
  TriggerMention trigger;
  // role -> spans in document order
  std::map<std::string, std::vector<Span>> arguments;
  // bare role -> label as written in the source file
  std::map<std::string, std::string> raw_roles;

  const std::vector<Span>* spans_for(const std::string& role) const {
    auto it = arguments.find(role);
    return it == arguments.end() ? nullptr : &it->second;
  }

  bool operator==(const EventInstance&) const = default;
};

struct CorpusSplit {
  std::vector<Document> documents;
  std::map<std::string, std::vector<EventInstance>> events;

  const std::vector<EventInstance>& events_of(const std::string& doc_key) const {
    static const std::vector<EventInstance> kNone;
    auto it = events.find(doc_key);
    return it == events.end() ? kNone : it->second;
  }

  const Document* find(const std::string& doc_key) const {
    for (const auto& d : documents) {
      if (d.doc_key == doc_key) return &d;
    }
    return nullptr;
  }

  std::size_t event_count() const {
    std::size_t n = 0;
    for (const auto& [k, v] : events) n += v.size();
    return n;
  }

  std::size_t argument_count() const {
    std::size_t n = 0;
    for (const auto& [k, evs] : events) {
      for (const auto& e : evs) {
        for (const auto& [r, spans] : e.arguments) n += spans.size();
      }
    }
    return n;
  }

  // Documents of one split, events carried along.
  CorpusSplit subset(Split s) const {
    CorpusSplit out;
    for (const auto& d : documents) {
      if (d.split != s) continue;
      out.documents.push_back(d);
      auto it = events.find(d.doc_key);
      if (it != events.end()) out.events[d.doc_key] = it->second;
    }
    return out;
  }

  void append(const CorpusSplit& other) {
    for (const auto& d : other.documents) {
      documents.push_back(d);
      auto it = other.events.find(d.doc_key);
      if (it != other.events.end()) events[d.doc_key] = it->second;
    }
  }

  bool operator==(const CorpusSplit&) const = default;
};

struct ArgumentLink {
  Span trigger;
  Span argument;
  std::string role;  // raw label
};

// "evt089arg01victim" -> "victim". Already-bare labels pass through.
inline std::string normalize_role(const std::string& raw) {
  static const std::regex kPrefixed(R"(^evt\d+arg\d+(.+)$)");
  std::smatch m;
  if (std::regex_match(raw, m, kPrefixed)) return m[1].str();
  return raw;
}

// One EventInstance per trigger, in trigger order.
inline std::vector<EventInstance> group_events(const Document& doc,
                                               const std::vector<TriggerMention>& triggers,
                                               const std::vector<ArgumentLink>& links) {
  std::vector<EventInstance> events;
  events.reserve(triggers.size());
  for (const auto& t : triggers) {
    EventInstance e;
    e.trigger = t;
    events.push_back(std::move(e));
  }
  for (const auto& link : links) {
    EventInstance* owner = nullptr;
    for (auto& e : events) {
      if (e.trigger.span != link.trigger) continue;
      if (owner != nullptr) {
        throw IntegrityError("document '" + doc.doc_key + "': two triggers share span [" +
                             std::to_string(link.trigger.start) + "," +
                             std::to_string(link.trigger.end) + "]");
      }
      owner = &e;
    }
    if (owner == nullptr) {
      throw IntegrityError("document '" + doc.doc_key + "': link references unknown trigger span [" +
                           std::to_string(link.trigger.start) + "," +
                           std::to_string(link.trigger.end) + "]");
    }
    const std::string role = normalize_role(link.role);
    owner->arguments[role].push_back(link.argument);
    owner->raw_roles.emplace(role, link.role);
  }
  for (auto& e : events) {
    for (auto& [role, spans] : e.arguments) std::sort(spans.begin(), spans.end());
  }
  return events;
}

namespace detail {

inline const std::set<std::string>& rams_known_keys() {
  static const std::set<std::string> kKeys = {
      "doc_key", "sentences", "evt_triggers", "gold_evt_links", "ent_spans", "source_url",
      "language_id", "rel_triggers", "gold_rel_links", "split"};
  return kKeys;
}

inline const char* rams_schema_hint() {
  return "expected RAMS JSON-lines keys: doc_key (string), sentences ([[token]]), "
         "evt_triggers ([[start, end, [[event_type, score]]]]), gold_evt_links "
         "([[[ts, te], [as, ae], role]]); optional: ent_spans, split, source_url, language_id, "
         "rel_triggers, gold_rel_links";
}

inline Span read_pair(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() < 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw FormatError(where + ": expected [start, end] integer pair; " + rams_schema_hint());
  }
  return Span{j[0].get<int>(), j[1].get<int>()};
}

}  // namespace detail

struct ParsedLine {
  Document doc;
  std::vector<EventInstance> events;
};

inline ParsedLine parse_rams_line(const std::string& line, std::size_t line_no,
                                  std::optional<Split> default_split) {
  const std::string where = "line " + std::to_string(line_no);
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(where + ": malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw FormatError(where + ": not a JSON object; " + detail::rams_schema_hint());
  for (const auto& [key, _] : j.items()) {
    if (!detail::rams_known_keys().count(key)) {
      throw FormatError(where + ": unknown field '" + key + "'; " + detail::rams_schema_hint());
    }
  }
  for (const char* key : {"doc_key", "sentences", "evt_triggers", "gold_evt_links"}) {
    if (!j.contains(key)) {
      throw FormatError(where + ": missing field '" + key + "'; " + detail::rams_schema_hint());
    }
  }

  ParsedLine out;
  Document& doc = out.doc;
  if (!j["doc_key"].is_string()) throw FormatError(where + ": doc_key must be a string");
  doc.doc_key = j["doc_key"].get<std::string>();

  if (!j["sentences"].is_array()) throw FormatError(where + ": sentences must be a list of lists");
  for (const auto& sent : j["sentences"]) {
    if (!sent.is_array()) throw FormatError(where + ": sentences must be a list of lists");
    std::vector<std::string> toks;
    for (const auto& t : sent) {
      if (!t.is_string()) throw FormatError(where + ": tokens must be strings");
      toks.push_back(t.get<std::string>());
    }
    doc.tokens.insert(doc.tokens.end(), toks.begin(), toks.end());
    doc.sentences.push_back(std::move(toks));
  }

  std::optional<Split> split = default_split;
  if (j.contains("split")) {
    if (!j["split"].is_string()) throw FormatError(where + ": split must be a string");
    split = parse_split(j["split"].get<std::string>());
    if (!split) throw FormatError(where + ": unknown split '" + j["split"].get<std::string>() + "'");
  }
  if (!split) {
    throw FormatError(where + ": no split field and the file name does not name a split");
  }
  doc.split = *split;

  const int n = doc.size();
  auto check = [&](Span s, const char* what) {
    if (!s.valid_for(n)) {
      throw ValidationError("document '" + doc.doc_key + "' (" + where + "): " + what + " span [" +
                            std::to_string(s.start) + "," + std::to_string(s.end) +
                            "] outside [0," + std::to_string(n) + ")");
    }
  };

  std::vector<TriggerMention> triggers;
  if (!j["evt_triggers"].is_array()) throw FormatError(where + ": evt_triggers must be a list");
  for (const auto& t : j["evt_triggers"]) {
    if (!t.is_array() || t.size() != 3 || !t[2].is_array() || t[2].empty() ||
        !t[2][0].is_array() || t[2][0].empty() || !t[2][0][0].is_string()) {
      throw FormatError(where + ": bad evt_triggers record; " + detail::rams_schema_hint());
    }
    TriggerMention m;
    m.span = detail::read_pair(t, where);
    m.event_type = t[2][0][0].get<std::string>();
    check(m.span, "trigger");
    triggers.push_back(std::move(m));
  }

  std::vector<ArgumentLink> links;
  if (!j["gold_evt_links"].is_array()) throw FormatError(where + ": gold_evt_links must be a list");
  for (const auto& l : j["gold_evt_links"]) {
    if (!l.is_array() || l.size() != 3 || !l[2].is_string()) {
      throw FormatError(where + ": bad gold_evt_links record; " + detail::rams_schema_hint());
    }
    ArgumentLink link{detail::read_pair(l[0], where), detail::read_pair(l[1], where),
                      l[2].get<std::string>()};
    check(link.trigger, "link trigger");
    check(link.argument, "argument");
    links.push_back(std::move(link));
  }

  out.events = group_events(doc, triggers, links);
  return out;
}

inline std::optional<Split> split_from_filename(const std::filesystem::path& path) {
  const std::string stem = path.filename().string();
  for (const char* name : {"train", "dev", "test"}) {
    if (stem.find(name) != std::string::npos) return parse_split(name);
  }
  return std::nullopt;
}

inline CorpusSplit load_rams_stream(std::istream& in, std::optional<Split> default_split) {
  CorpusSplit corpus;
  std::set<std::pair<Split, std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ParsedLine parsed = parse_rams_line(line, line_no, default_split);
    if (!seen.emplace(parsed.doc.split, parsed.doc.doc_key).second) {
      throw ValidationError("document '" + parsed.doc.doc_key + "' (line " +
                            std::to_string(line_no) + "): duplicate doc_key within split");
    }
    corpus.events[parsed.doc.doc_key] = std::move(parsed.events);
    corpus.documents.push_back(std::move(parsed.doc));
  }
  return corpus;
}

inline CorpusSplit load_rams(const std::filesystem::path& path,
                             std::optional<Split> split_override = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw PathError("cannot open RAMS file '" + path.string() + "'");
  auto split = split_override ? split_override : split_from_filename(path);
  try {
    return load_rams_stream(in, split);
  } catch (const Error& e) {
    // Re-raise with the file name for context.
    switch (e.category()) {
      case ErrorCategory::kParse: throw ParseError(path.string() + ": " + e.what());
      case ErrorCategory::kFormat: throw FormatError(path.string() + ": " + e.what());
      case ErrorCategory::kValidation: throw ValidationError(path.string() + ": " + e.what());
      case ErrorCategory::kIntegrity: throw IntegrityError(path.string() + ": " + e.what());
      default: throw;
    }
  }
}

inline json document_to_rams_json(const Document& doc, const std::vector<EventInstance>& events) {
  json j;
  j["doc_key"] = doc.doc_key;
  j["sentences"] = doc.sentences;
  j["split"] = split_name(doc.split);
  json triggers = json::array();
  json links = json::array();
  for (const auto& e : events) {
    triggers.push_back(json::array(
        {e.trigger.span.start, e.trigger.span.end, json::array({json::array({e.trigger.event_type, 1.0})})}));
    for (const auto& [role, spans] : e.arguments) {
      auto raw = e.raw_roles.find(role);
      const std::string label = raw == e.raw_roles.end() ? role : raw->second;
      for (const auto& s : spans) {
        links.push_back(json::array({json::array({e.trigger.span.start, e.trigger.span.end}),
                                     json::array({s.start, s.end}), label}));
      }
    }
  }
  j["evt_triggers"] = std::move(triggers);
  j["gold_evt_links"] = std::move(links);
  return j;
}

inline void write_rams(std::ostream& out, const CorpusSplit& corpus) {
  for (const auto& d : corpus.documents) {
    out << document_to_rams_json(d, corpus.events_of(d.doc_key)).dump() << '\n';
  }
}

inline void write_rams(const std::filesystem::path& path, const CorpusSplit& corpus) {
  std::ofstream out(path);
  if (!out) throw PathError("cannot write '" + path.string() + "'");
  write_rams(out, corpus);
}

}  // namespace eae
