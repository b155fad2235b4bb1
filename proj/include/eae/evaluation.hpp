#pragma once

// Exact-span scoring. A scored item is a (doc_key, event index, role, span)
// tuple; a prediction is correct iff the identical gold tuple exists, and each
// gold tuple is consumed by at most one prediction. Every span of a
// multi-span role counts separately.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eae/corpus.hpp"
#include "eae/error.hpp"
#include "eae/prompting.hpp"

namespace eae {

struct PredictionRecord {
  std::string doc_key;
  int event_index = 0;
  std::string role;
  std::vector<Span> spans;
  std::string variant;
  std::string marking;

  bool operator==(const PredictionRecord&) const = default;
};

inline json prediction_to_json(const PredictionRecord& r) {
  json spans = json::array();
  for (const auto& s : r.spans) spans.push_back({s.start, s.end});
  return {{"doc_key", r.doc_key}, {"event_index", r.event_index}, {"role", r.role},
          {"spans", spans},       {"variant", r.variant},         {"marking", r.marking}};
}

inline PredictionRecord prediction_from_json(const json& j) {
  PredictionRecord r;
  try {
    r.doc_key = j.at("doc_key").get<std::string>();
    r.event_index = j.at("event_index").get<int>();
    r.role = j.at("role").get<std::string>();
    for (const auto& s : j.at("spans")) r.spans.push_back(Span{s.at(0).get<int>(), s.at(1).get<int>()});
    r.variant = j.value("variant", "");
    r.marking = j.value("marking", "");
  } catch (const json::exception& e) {
    throw FormatError(std::string("prediction record: ") + e.what() +
                      " (expected doc_key, event_index, role, spans[[start,end]], variant, marking)");
  }
  std::sort(r.spans.begin(), r.spans.end());
  return r;
}

inline void write_predictions(const std::filesystem::path& path, const std::vector<PredictionRecord>& preds) {
  std::ofstream out(path);
  if (!out) throw PathError("cannot write predictions '" + path.string() + "'");
  for (const auto& p : preds) out << prediction_to_json(p).dump() << '\n';
}

inline std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PathError("cannot open predictions '" + path.string() + "'");
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(prediction_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MatchCounts {
  long tp = 0;
  long n_pred = 0;
  long n_gold = 0;

  MatchCounts& operator+=(const MatchCounts& o) {
    tp += o.tp;
    n_pred += o.n_pred;
    n_gold += o.n_gold;
    return *this;
  }
  bool operator==(const MatchCounts&) const = default;
};

inline Scores prf1(long tp, long n_pred, long n_gold) {
  if (tp < 0 || n_pred < 0 || n_gold < 0) throw UsageError("prf1: negative count");
  if (tp > n_pred || tp > n_gold) {
    throw UsageError("prf1: true positives (" + std::to_string(tp) + ") exceed predicted (" +
                     std::to_string(n_pred) + ") or gold (" + std::to_string(n_gold) + ") total");
  }
  Scores s;
  s.precision = n_pred == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_pred);
  s.recall = n_gold == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_gold);
  const double d = s.precision + s.recall;
  s.f1 = d > 0.0 ? 2.0 * s.precision * s.recall / d : 0.0;
  return s;
}

// F1 from precision and recall already expressed as fractions.
inline double f1_from_pr(double precision, double recall) {
  const double d = precision + recall;
  return d > 0.0 ? 2.0 * precision * recall / d : 0.0;
}

struct EvalReport {
  Scores overall;
  MatchCounts counts;
  std::map<std::string, std::pair<Scores, MatchCounts>> per_role;
  std::string matcher = "exact-span";

  json to_json() const {
    auto pct = [](double x) { return std::round(x * 1000.0) / 10.0; };
    json roles = json::object();
    for (const auto& [role, sc] : per_role) {
      roles[role] = {{"p", pct(sc.first.precision)}, {"r", pct(sc.first.recall)}, {"f1", pct(sc.first.f1)},
                     {"tp", sc.second.tp},           {"n_pred", sc.second.n_pred}, {"n_gold", sc.second.n_gold}};
    }
    return {{"p", pct(overall.precision)}, {"r", pct(overall.recall)}, {"f1", pct(overall.f1)},
            {"tp", counts.tp},            {"n_pred", counts.n_pred},  {"n_gold", counts.n_gold},
            {"matcher", matcher},         {"per_role", roles}};
  }

  static EvalReport from_json(const json& j) {
    EvalReport r;
    r.counts = MatchCounts{j.at("tp").get<long>(), j.at("n_pred").get<long>(), j.at("n_gold").get<long>()};
    r.overall = prf1(r.counts.tp, r.counts.n_pred, r.counts.n_gold);
    r.matcher = j.value("matcher", r.matcher);
    if (j.contains("per_role")) {
      for (const auto& [role, v] : j["per_role"].items()) {
        MatchCounts c{v.at("tp").get<long>(), v.at("n_pred").get<long>(), v.at("n_gold").get<long>()};
        r.per_role[role] = {prf1(c.tp, c.n_pred, c.n_gold), c};
      }
    }
    return r;
  }
};

// (doc_key, event index) pairs to score; empty means the whole gold split.
using EvalScope = std::set<std::pair<std::string, int>>;

inline EvalReport evaluate(const std::vector<PredictionRecord>& preds, const CorpusSplit& gold,
                           const EvalScope& scope = {}) {
  using Item = std::tuple<std::string, int, std::string, Span>;
  std::map<Item, int> remaining;
  std::map<std::string, MatchCounts> by_role;
  auto in_scope = [&](const std::string& doc, int ev) {
    return scope.empty() || scope.count({doc, ev}) > 0;
  };
  for (const auto& d : gold.documents) {
    const auto& events = gold.events_of(d.doc_key);
    for (int ei = 0; ei < static_cast<int>(events.size()); ++ei) {
      if (!in_scope(d.doc_key, ei)) continue;
      for (const auto& [role, spans] : events[static_cast<std::size_t>(ei)].arguments) {
        for (const auto& s : spans) {
          ++remaining[Item{d.doc_key, ei, role, s}];
          ++by_role[role].n_gold;
        }
      }
    }
  }
  for (const auto& p : preds) {
    const Document* doc = gold.find(p.doc_key);
    if (doc == nullptr) throw IntegrityError("prediction references unknown document '" + p.doc_key + "'");
    const auto& events = gold.events_of(p.doc_key);
    if (p.event_index < 0 || p.event_index >= static_cast<int>(events.size())) {
      throw IntegrityError("prediction references event " + std::to_string(p.event_index) +
                           " of document '" + p.doc_key + "', which has " +
                           std::to_string(events.size()) + " events");
    }
    if (!in_scope(p.doc_key, p.event_index)) continue;
    for (const auto& s : p.spans) {
      auto& c = by_role[p.role];
      ++c.n_pred;
      auto it = remaining.find(Item{p.doc_key, p.event_index, p.role, s});
      if (it != remaining.end() && it->second > 0) {
        --it->second;
        ++c.tp;
      }
    }
  }
  EvalReport report;
  for (const auto& [role, c] : by_role) {
    report.counts += c;
    report.per_role[role] = {prf1(c.tp, c.n_pred, c.n_gold), c};
  }
  report.overall = prf1(report.counts.tp, report.counts.n_pred, report.counts.n_gold);
  return report;
}

inline MatchCounts match(const std::vector<PredictionRecord>& preds, const CorpusSplit& gold,
                         const EvalScope& scope = {}) {
  return evaluate(preds, gold, scope).counts;
}

// Gold arguments rendered as predictions (one record per event and role).
inline std::vector<PredictionRecord> gold_as_predictions(const CorpusSplit& gold) {
  std::vector<PredictionRecord> out;
  for (const auto& d : gold.documents) {
    const auto& events = gold.events_of(d.doc_key);
    for (int ei = 0; ei < static_cast<int>(events.size()); ++ei) {
      for (const auto& [role, spans] : events[static_cast<std::size_t>(ei)].arguments) {
        out.push_back(PredictionRecord{d.doc_key, ei, role, spans, "gold", ""});
      }
    }
  }
  return out;
}

// One finished run, as aggregated into a results grid.
struct GridRun {
  std::string variant;  // variant name, e.g. "mrole-ceiling"
  std::string encoder;  // e.g. "BERT-b" or a checkpoint id
  std::string loss;     // "ce" or "dice"
  EvalReport report;
};

struct GridTable {
  json data;
  std::string text;
};

inline std::string format_pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", x * 100.0);
  return buf;
}

// Rows keyed by (variant, encoder); plain (ce) runs fill the first column
// group and dice runs the second. Later runs of the same cell replace earlier ones.
inline GridTable report_grid(const std::vector<GridRun>& runs) {
  struct Row {
    std::string variant, encoder;
    std::optional<Scores> plain, dice;
  };
  auto variant_rank = [](const std::string& v) {
    const auto& all = all_variants();
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (v == variant_name(all[i])) return static_cast<int>(i);
    }
    return static_cast<int>(all.size());
  };
  std::vector<Row> rows;
  std::vector<std::string> encoder_order;
  for (const auto& run : runs) {
    if (std::find(encoder_order.begin(), encoder_order.end(), run.encoder) == encoder_order.end()) {
      encoder_order.push_back(run.encoder);
    }
    auto it = std::find_if(rows.begin(), rows.end(), [&](const Row& r) {
      return r.variant == run.variant && r.encoder == run.encoder;
    });
    if (it == rows.end()) {
      rows.push_back(Row{run.variant, run.encoder, std::nullopt, std::nullopt});
      it = rows.end() - 1;
    }
    (run.loss == "dice" ? it->dice : it->plain) = run.report.overall;
  }
  std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
    const int ra = variant_rank(a.variant), rb = variant_rank(b.variant);
    if (ra != rb) return ra < rb;
    if (ra == static_cast<int>(all_variants().size()) && a.variant != b.variant) return a.variant < b.variant;
    auto ea = std::find(encoder_order.begin(), encoder_order.end(), a.encoder);
    auto eb = std::find(encoder_order.begin(), encoder_order.end(), b.encoder);
    return ea < eb;
  });

  auto label = [](const std::string& v) {
    for (auto k : all_variants()) {
      if (v == variant_name(k)) return std::string(variant_label(k));
    }
    return v;
  };
  auto cell = [](const std::optional<Scores>& s) {
    if (!s) return json(nullptr);
    return json{{"p", std::round(s->precision * 1000.0) / 10.0},
                {"r", std::round(s->recall * 1000.0) / 10.0},
                {"f1", std::round(s->f1 * 1000.0) / 10.0}};
  };

  GridTable table;
  table.data = {{"columns", {"RAMS", "RAMS w dice"}}, {"rows", json::array()}};
  std::vector<std::vector<std::string>> lines;
  lines.push_back({"Model", "PLM", "P", "R", "F1", "P", "R", "F1"});
  for (const auto& r : rows) {
    table.data["rows"].push_back(
        {{"model", label(r.variant)}, {"variant", r.variant}, {"plm", r.encoder},
         {"plain", cell(r.plain)}, {"dice", cell(r.dice)}});
    std::vector<std::string> line = {label(r.variant), r.encoder};
    for (const auto* s : {&r.plain, &r.dice}) {
      if (*s) {
        line.push_back(format_pct((*s)->precision));
        line.push_back(format_pct((*s)->recall));
        line.push_back(format_pct((*s)->f1));
      } else {
        line.insert(line.end(), {"-", "-", "-"});
      }
    }
    lines.push_back(std::move(line));
  }

  std::vector<std::size_t> width(8, 0);
  for (const auto& l : lines) {
    for (std::size_t i = 0; i < l.size(); ++i) width[i] = std::max(width[i], l[i].size());
  }
  auto pad = [](const std::string& s, std::size_t w, bool left) {
    const std::string fill(w > s.size() ? w - s.size() : 0, ' ');
    return left ? s + fill : fill + s;
  };
  std::ostringstream out;
  // Each numeric cell is followed by two spaces in the first group.
  const std::size_t group = width[2] + width[3] + width[4] + 6;
  out << pad("", width[0], true) << "  " << pad("", width[1], true) << "  | "
      << pad("RAMS", group, true) << "| RAMS w dice\n";
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto& l = lines[li];
    out << pad(l[0], width[0], true) << "  " << pad(l[1], width[1], true) << "  | ";
    for (std::size_t i = 2; i < 5; ++i) out << pad(l[i], width[i], false) << "  ";
    out << "| ";
    for (std::size_t i = 5; i < 8; ++i) out << pad(l[i], width[i], false) << (i < 7 ? "  " : "");
    out << '\n';
  }
  table.text = out.str();
  return table;
}

}  // namespace eae
