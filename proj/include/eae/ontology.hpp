#pragma once

// Event-type -> ordered role list.
//
// File format (tab separated, one event type per line, '#' starts a comment):
//   transport.person<TAB>transporter,passenger,origin
// Role order in the file is the clause order used by templates.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "eae/corpus.hpp"
#include "eae/error.hpp"

namespace eae {

class Ontology {
 public:
  Ontology() = default;

  void add(const std::string& event_type, std::vector<std::string> roles) {
    roles_[event_type] = std::move(roles);
  }

  bool has_event_type(const std::string& event_type) const { return roles_.count(event_type) > 0; }

  const std::vector<std::string>& roles_for(const std::string& event_type) const {
    auto it = roles_.find(event_type);
    if (it == roles_.end()) throw OntologyError("unknown event type '" + event_type + "'");
    return it->second;
  }

  bool has_role(const std::string& event_type, const std::string& role) const {
    auto it = roles_.find(event_type);
    if (it == roles_.end()) return false;
    return std::find(it->second.begin(), it->second.end(), role) != it->second.end();
  }

  std::size_t event_type_count() const { return roles_.size(); }

  std::set<std::string> role_inventory() const {
    std::set<std::string> all;
    for (const auto& [t, rs] : roles_) all.insert(rs.begin(), rs.end());
    return all;
  }

  const std::map<std::string, std::vector<std::string>>& table() const { return roles_; }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw PathError("cannot write ontology '" + path.string() + "'");
    for (const auto& [t, rs] : roles_) {
      out << t << '\t';
      for (std::size_t i = 0; i < rs.size(); ++i) out << (i ? "," : "") << rs[i];
      out << '\n';
    }
  }

  static Ontology load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PathError("cannot open ontology '" + path.string() + "'");
    Ontology o;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos || tab == 0) {
        throw FormatError(path.string() + ": line " + std::to_string(line_no) +
                          ": expected 'event_type<TAB>role,role,...'");
      }
      std::vector<std::string> roles;
      std::stringstream ss(line.substr(tab + 1));
      std::string r;
      while (std::getline(ss, r, ',')) {
        if (!r.empty()) roles.push_back(r);
      }
      o.add(line.substr(0, tab), std::move(roles));
    }
    return o;
  }

  // Ontology induced from gold annotations. Roles are ordered by the argument
  // number embedded in RAMS labels (evtNNNargMM...), then by first appearance.
  static Ontology derive(const CorpusSplit& corpus) {
    static const std::regex kArgNum(R"(^evt\d+arg(\d+).+$)");
    struct Entry {
      int arg_num;
      int first_seen;
    };
    std::map<std::string, std::map<std::string, Entry>> seen;
    int counter = 0;
    for (const auto& d : corpus.documents) {
      for (const auto& e : corpus.events_of(d.doc_key)) {
        auto& roles = seen[e.trigger.event_type];
        for (const auto& [role, spans] : e.arguments) {
          if (roles.count(role)) continue;
          int num = 1 << 20;
          auto raw = e.raw_roles.find(role);
          std::smatch m;
          if (raw != e.raw_roles.end() && std::regex_match(raw->second, m, kArgNum)) {
            num = std::stoi(m[1].str());
          }
          roles.emplace(role, Entry{num, counter++});
        }
      }
    }
    Ontology o;
    for (auto& [type, roles] : seen) {
      std::vector<std::pair<std::string, Entry>> v(roles.begin(), roles.end());
      std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        if (a.second.arg_num != b.second.arg_num) return a.second.arg_num < b.second.arg_num;
        return a.second.first_seen < b.second.first_seen;
      });
      std::vector<std::string> names;
      for (auto& [n, _] : v) names.push_back(n);
      o.add(type, std::move(names));
    }
    return o;
  }

  // Every trigger type and role in the corpus must be known.
  void validate(const CorpusSplit& corpus) const {
    for (const auto& d : corpus.documents) {
      for (const auto& e : corpus.events_of(d.doc_key)) {
        const auto& roles = roles_for(e.trigger.event_type);
        for (const auto& [role, spans] : e.arguments) {
          if (std::find(roles.begin(), roles.end(), role) == roles.end()) {
            throw OntologyError("document '" + d.doc_key + "': role '" + role +
                                "' not defined for event type '" + e.trigger.event_type + "'");
          }
        }
      }
    }
  }

  bool operator==(const Ontology&) const = default;

 private:
  std::map<std::string, std::vector<std::string>> roles_;
};

}  // namespace eae
