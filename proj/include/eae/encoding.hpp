#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "eae/corpus.hpp"
#include "eae/error.hpp"
#include "eae/prompting.hpp"
#include "eae/tokenizer.hpp"

namespace eae {

inline constexpr int kDefaultMaxLen = 512;

// Piece range [begin, end) of one retained original document token.
struct TokenPieces {
  int token = 0;  // original document index
  int begin = 0;
  int end = 0;

  bool operator==(const TokenPieces&) const = default;
};

struct ModelInput {
  std::vector<int> ids;
  std::vector<int> segment;             // per piece
  std::vector<TokenPieces> alignment;   // retained original tokens, in order
  int doc_begin = 0;                    // piece range covering the document window
  int doc_end = 0;
  int window_begin = 0;                 // assembled-token window [begin, end)
  int window_end = 0;

  int length() const { return static_cast<int>(ids.size()); }
  int retained() const { return static_cast<int>(alignment.size()); }
  // First retained original token index; decoded spans are offset by it.
  int first_token() const { return alignment.empty() ? 0 : alignment.front().token; }
};

struct TokenLabelVector {
  std::vector<double> values;
  int size() const { return static_cast<int>(values.size()); }
};

struct TokenProbVector {
  std::vector<double> values;
  int size() const { return static_cast<int>(values.size()); }
};

namespace detail {

// Grows [lo, hi] one token at a time while the side's budget allows.
inline int grow_left(const std::vector<int>& cost, int& lo, int budget) {
  int used = 0;
  while (lo > 0 && used + cost[static_cast<std::size_t>(lo - 1)] <= budget) {
    used += cost[static_cast<std::size_t>(--lo)];
  }
  return used;
}

inline int grow_right(const std::vector<int>& cost, int& hi, int budget) {
  int used = 0;
  const int n = static_cast<int>(cost.size());
  while (hi + 1 < n && used + cost[static_cast<std::size_t>(hi + 1)] <= budget) {
    used += cost[static_cast<std::size_t>(++hi)];
  }
  return used;
}

}  // namespace detail

// [CLS] prompt [SEP] document-window [SEP]. The prompt is never truncated;
// an over-long document is windowed around the trigger with equal left and
// right piece budgets, unused budget spilling to the other side.
inline ModelInput encode(const AssembledSequence& seq, const WordPieceTokenizer& tok,
                         int max_len = kDefaultMaxLen) {
  const std::vector<int> prompt_ids = tok.encode_text(seq.prompt);
  const int budget = max_len - 3 - static_cast<int>(prompt_ids.size());
  if (budget <= 0) {
    throw ConfigError("prompt alone needs " + std::to_string(prompt_ids.size() + 3) +
                      " pieces, exceeding max_len " + std::to_string(max_len));
  }
  std::vector<std::vector<int>> token_ids;
  token_ids.reserve(seq.doc_tokens.size());
  std::vector<int> cost;
  for (std::size_t i = 0; i < seq.doc_tokens.size(); ++i) {
    const auto& t = seq.doc_tokens[i];
    if (seq.is_marker(static_cast<int>(i))) {
      token_ids.push_back({tok.id(t)});
    } else {
      token_ids.push_back(tok.encode_token(t));
    }
    cost.push_back(static_cast<int>(token_ids.back().size()));
  }

  int lo = seq.trigger.start;
  int hi = seq.trigger.end;
  if (seq.marking == TriggerMarking::kMarkers) {
    --lo;
    ++hi;
  }
  int used = 0;
  for (int i = lo; i <= hi; ++i) used += cost[static_cast<std::size_t>(i)];
  if (used > budget) {
    throw ConfigError("trigger does not fit in max_len " + std::to_string(max_len));
  }
  int remaining = budget - used;
  const int left_budget = remaining / 2;
  const int right_budget = remaining - left_budget;
  const int left_used = detail::grow_left(cost, lo, left_budget);
  const int right_used = detail::grow_right(cost, hi, right_budget);
  remaining -= left_used + right_used;
  // Spill what one side could not use to the other.
  remaining -= detail::grow_left(cost, lo, remaining);
  remaining -= detail::grow_right(cost, hi, remaining);

  ModelInput in;
  in.window_begin = lo;
  in.window_end = hi + 1;
  in.ids.push_back(tok.cls_id());
  in.ids.insert(in.ids.end(), prompt_ids.begin(), prompt_ids.end());
  in.ids.push_back(tok.sep_id());
  in.segment.assign(in.ids.size(), 0);
  in.doc_begin = in.length();

  // assembled index -> original index
  std::vector<int> original(seq.doc_tokens.size(), -1);
  for (std::size_t i = 0; i < seq.remap.size(); ++i) {
    original[static_cast<std::size_t>(seq.remap[i])] = static_cast<int>(i);
  }
  for (int i = lo; i <= hi; ++i) {
    const auto& ids = token_ids[static_cast<std::size_t>(i)];
    TokenPieces tp{original[static_cast<std::size_t>(i)], in.length(), 0};
    in.ids.insert(in.ids.end(), ids.begin(), ids.end());
    in.segment.insert(in.segment.end(), ids.size(), seq.segment[static_cast<std::size_t>(i)]);
    tp.end = in.length();
    if (tp.token >= 0) in.alignment.push_back(tp);
  }
  in.doc_end = in.length();
  in.ids.push_back(tok.sep_id());
  in.segment.push_back(0);
  return in;
}

// 1 at every token covered by the role's gold spans, mapped through remap
// (identity when empty) into an index space of size n.
inline TokenLabelVector make_labels(const EventInstance& event, const std::string& target_role,
                                    int n, const std::vector<int>& remap = {}) {
  TokenLabelVector labels;
  labels.values.assign(static_cast<std::size_t>(std::max(n, 0)), 0.0);
  const auto* spans = event.spans_for(target_role);
  if (spans == nullptr) return labels;
  for (const auto& s : *spans) {
    for (int i = s.start; i <= s.end; ++i) {
      int j = i;
      if (!remap.empty()) {
        if (i < 0 || i >= static_cast<int>(remap.size())) j = -1;
        else j = remap[static_cast<std::size_t>(i)];
      }
      if (j < 0 || j >= n) {
        throw IntegrityError("label span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
                             "] for role '" + target_role + "' falls outside [0," +
                             std::to_string(n) + ")");
      }
      labels.values[static_cast<std::size_t>(j)] = 1.0;
    }
  }
  return labels;
}

// Labels restricted to the original tokens retained by an encoded window.
inline TokenLabelVector window_labels(const TokenLabelVector& full, const ModelInput& in) {
  TokenLabelVector out;
  out.values.reserve(in.alignment.size());
  for (const auto& a : in.alignment) out.values.push_back(full.values.at(static_cast<std::size_t>(a.token)));
  return out;
}

}  // namespace eae
