#pragma once

// WordPiece tokenizer compatible with BERT-style vocab.txt files.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "eae/error.hpp"
#include "eae/prompting.hpp"

namespace eae {

inline constexpr std::string_view kPadToken = "[PAD]";
inline constexpr std::string_view kUnkToken = "[UNK]";
inline constexpr std::string_view kClsToken = "[CLS]";
inline constexpr std::string_view kSepToken = "[SEP]";
inline constexpr std::string_view kMaskToken = "[MASK]";

class WordPieceTokenizer {
 public:
  WordPieceTokenizer() = default;

  WordPieceTokenizer(std::vector<std::string> vocab, bool lowercase) : lowercase_(lowercase) {
    for (auto& piece : vocab) add_piece(std::move(piece));
    ensure_specials();
  }

  static WordPieceTokenizer load(const std::filesystem::path& vocab_path, bool lowercase) {
    std::ifstream in(vocab_path);
    if (!in) throw PathError("cannot open vocabulary '" + vocab_path.string() + "'");
    std::vector<std::string> vocab;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      vocab.push_back(line);
    }
    return WordPieceTokenizer(std::move(vocab), lowercase);
  }

  void save(const std::filesystem::path& vocab_path) const {
    std::ofstream out(vocab_path);
    if (!out) throw PathError("cannot write vocabulary '" + vocab_path.string() + "'");
    for (const auto& p : pieces_) out << p << '\n';
  }

  // Vocabulary covering every character (so no word maps to [UNK]) plus
  // whole words seen at least min_count times.
  static WordPieceTokenizer build(const std::vector<std::string>& words, int min_count,
                                  bool lowercase) {
    std::vector<std::string> vocab = {std::string(kPadToken), std::string(kUnkToken),
                                      std::string(kClsToken), std::string(kSepToken),
                                      std::string(kMaskToken)};
    for (auto s : never_split()) vocab.emplace_back(s);
    std::map<std::string, int> counts;
    std::set<std::string> chars;
    WordPieceTokenizer probe({}, lowercase);
    for (const auto& w : words) {
      for (const auto& t : probe.basic_tokenize(w)) {
        if (is_never_split(t)) continue;
        ++counts[t];
        for (char c : t) chars.insert(std::string(1, c));
      }
    }
    for (const auto& c : chars) vocab.push_back(c);
    for (const auto& c : chars) vocab.push_back("##" + c);
    for (const auto& [w, n] : counts) {
      if (n >= min_count && w.size() > 1) vocab.push_back(w);
    }
    return WordPieceTokenizer(std::move(vocab), lowercase);
  }

  static const std::vector<std::string_view>& never_split() {
    static const std::vector<std::string_view> kTokens = {kTriggerOpen, kTriggerClose, kPlaceholder};
    return kTokens;
  }

  static bool is_never_split(std::string_view t) {
    const auto& ns = never_split();
    return std::find(ns.begin(), ns.end(), t) != ns.end();
  }

  // Whitespace split, punctuation split, optional lowercasing. Protected
  // tokens such as "<t>" and "[none]" are kept whole.
  std::vector<std::string> basic_tokenize(std::string_view text) const {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
      if (std::isspace(static_cast<unsigned char>(text[i]))) {
        ++i;
        continue;
      }
      bool matched = false;
      for (auto ns : never_split()) {
        if (text.substr(i, ns.size()) == ns) {
          out.emplace_back(ns);
          i += ns.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
      const unsigned char c = static_cast<unsigned char>(text[i]);
      if (is_punct(c)) {
        out.emplace_back(1, static_cast<char>(c));
        ++i;
        continue;
      }
      std::string word;
      while (i < text.size()) {
        const unsigned char d = static_cast<unsigned char>(text[i]);
        if (std::isspace(d) || is_punct(d) || starts_never_split(text.substr(i))) break;
        word += lowercase_ ? static_cast<char>(std::tolower(d)) : static_cast<char>(d);
        ++i;
      }
      out.push_back(std::move(word));
    }
    return out;
  }

  // Greedy longest-match-first.
  std::vector<int> wordpiece(const std::string& word) const {
    if (auto it = index_.find(word); it != index_.end() && is_never_split(word)) return {it->second};
    if (word.size() > 100) return {unk_id()};
    std::vector<int> out;
    std::size_t start = 0;
    while (start < word.size()) {
      std::size_t end = word.size();
      int found = -1;
      while (start < end) {
        std::string sub = word.substr(start, end - start);
        if (start > 0) sub = "##" + sub;
        auto it = index_.find(sub);
        if (it != index_.end()) {
          found = it->second;
          break;
        }
        --end;
      }
      if (found < 0) return {unk_id()};
      out.push_back(found);
      start = end;
    }
    return out;
  }

  std::vector<int> encode_text(std::string_view text) const {
    std::vector<int> out;
    for (const auto& w : basic_tokenize(text)) {
      auto ids = wordpiece(w);
      out.insert(out.end(), ids.begin(), ids.end());
    }
    return out;
  }

  // Pieces for one pre-split document token; never empty.
  std::vector<int> encode_token(const std::string& token) const {
    std::vector<int> out;
    for (const auto& w : basic_tokenize(token)) {
      auto ids = wordpiece(w);
      out.insert(out.end(), ids.begin(), ids.end());
    }
    if (out.empty()) out.push_back(unk_id());
    return out;
  }

  int id(std::string_view piece) const {
    auto it = index_.find(std::string(piece));
    return it == index_.end() ? unk_id() : it->second;
  }

  bool contains(std::string_view piece) const { return index_.count(std::string(piece)) > 0; }

  const std::string& piece(int id) const { return pieces_.at(static_cast<std::size_t>(id)); }

  int pad_id() const { return index_.at(std::string(kPadToken)); }
  int unk_id() const { return index_.at(std::string(kUnkToken)); }
  int cls_id() const { return index_.at(std::string(kClsToken)); }
  int sep_id() const { return index_.at(std::string(kSepToken)); }

  std::size_t size() const { return pieces_.size(); }
  bool lowercase() const { return lowercase_; }

 private:
  static bool is_punct(unsigned char c) {
    return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
           (c >= 123 && c <= 126);
  }

  static bool starts_never_split(std::string_view s) {
    for (auto ns : never_split()) {
      if (s.substr(0, ns.size()) == ns) return true;
    }
    return false;
  }

  void add_piece(std::string piece) {
    if (index_.count(piece)) {
      // Duplicate lines keep their position so ids stay aligned with the file.
      pieces_.push_back(piece + "\x01dup" + std::to_string(pieces_.size()));
      return;
    }
    index_.emplace(piece, static_cast<int>(pieces_.size()));
    pieces_.push_back(std::move(piece));
  }

  void ensure_specials() {
    for (auto s : {kPadToken, kUnkToken, kClsToken, kSepToken}) {
      if (!index_.count(std::string(s))) add_piece(std::string(s));
    }
    for (auto s : never_split()) {
      if (!index_.count(std::string(s))) add_piece(std::string(s));
    }
  }

  bool lowercase_ = true;
  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace eae
