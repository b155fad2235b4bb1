#pragma once

// Token-level training objectives over gold labels p and predictions q.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "eae/encoding.hpp"
#include "eae/error.hpp"

namespace eae {

inline constexpr double kDefaultDiceEps = 1e-6;
inline constexpr double kProbClamp = 1e-7;

enum class LossKind { kCe, kDice };

inline const char* loss_name(LossKind k) { return k == LossKind::kCe ? "ce" : "dice"; }

inline LossKind parse_loss(std::string_view s) {
  if (s == "ce") return LossKind::kCe;
  if (s == "dice") return LossKind::kDice;
  throw UsageError("unknown loss kind '" + std::string(s) + "' (expected ce or dice)");
}

namespace detail {

inline void check_lengths(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    throw UsageError(std::string(op) + ": label length " + std::to_string(a) +
                     " != prediction length " + std::to_string(b));
  }
}

}  // namespace detail

// Mean binary cross-entropy with q clamped to [c, 1 - c].
inline double loss_ce(const std::vector<double>& p, const std::vector<double>& q,
                      std::vector<double>* grad_q = nullptr, double clamp = kProbClamp) {
  detail::check_lengths(p.size(), q.size(), "loss_ce");
  const std::size_t n = p.size();
  if (grad_q != nullptr) grad_q->assign(n, 0.0);
  if (n == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool clamped = q[i] < clamp || q[i] > 1.0 - clamp;
    const double qi = std::clamp(q[i], clamp, 1.0 - clamp);
    total -= p[i] * std::log(qi) + (1.0 - p[i]) * std::log(1.0 - qi);
    if (grad_q != nullptr && !clamped) {
      (*grad_q)[i] = (-p[i] / qi + (1.0 - p[i]) / (1.0 - qi)) / static_cast<double>(n);
    }
  }
  return total / static_cast<double>(n);
}

inline double loss_ce(const TokenLabelVector& p, const TokenProbVector& q) {
  return loss_ce(p.values, q.values);
}

// 1 - (2 sum p q + eps) / (sum p^2 + sum q^2 + eps)
inline double loss_dice(const std::vector<double>& p, const std::vector<double>& q, double eps,
                        std::vector<double>* grad_q = nullptr) {
  detail::check_lengths(p.size(), q.size(), "loss_dice");
  if (eps < 0.0) throw UsageError("loss_dice: eps must be non-negative");
  double pq = 0.0, pp = 0.0, qq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    pq += p[i] * q[i];
    pp += p[i] * p[i];
    qq += q[i] * q[i];
  }
  const double num = 2.0 * pq + eps;
  const double den = pp + qq + eps;
  if (grad_q != nullptr) {
    grad_q->assign(p.size(), 0.0);
    if (den > 0.0) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        (*grad_q)[i] = -(2.0 * p[i] * den - num * 2.0 * q[i]) / (den * den);
      }
    }
  }
  if (den == 0.0) return 0.0;  // p = q = 0 with eps = 0: treat as perfect
  return 1.0 - num / den;
}

inline double loss_dice(const TokenLabelVector& p, const TokenProbVector& q,
                        double eps = kDefaultDiceEps) {
  return loss_dice(p.values, q.values, eps);
}

// Loss of logistic(logits) against p, with d(loss)/d(logits).
inline double loss_from_logits(LossKind kind, const std::vector<double>& p,
                               const std::vector<double>& logits, double dice_eps,
                               std::vector<double>* grad_logits) {
  std::vector<double> q(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    q[i] = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  }
  std::vector<double> gq;
  const double loss = kind == LossKind::kCe ? loss_ce(p, q, grad_logits ? &gq : nullptr)
                                            : loss_dice(p, q, dice_eps, grad_logits ? &gq : nullptr);
  if (grad_logits != nullptr) {
    grad_logits->resize(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) (*grad_logits)[i] = gq[i] * q[i] * (1.0 - q[i]);
  }
  return loss;
}

}  // namespace eae
