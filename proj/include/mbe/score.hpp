#pragma once

// Arm/item scores and randomized argmax selection.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "mbe/rng.hpp"

namespace mbe {

/// A score that may be undefined (zero weighted denominator). Undefined
/// scores rank strictly below every defined score, including -inf.
struct Score {
  double value = 0.0;
  bool defined = false;

  static Score of(double v) { return {v, true}; }
  static Score undefined() { return {0.0, false}; }
  static Score unexplored() { return {std::numeric_limits<double>::infinity(), true}; }

  /// Ratio num/den, undefined when den == 0. Negative denominators are kept as is.
  static Score ratio(double num, double den) { return den == 0.0 ? undefined() : of(num / den); }

  [[nodiscard]] bool is_infinite() const { return defined && value == std::numeric_limits<double>::infinity(); }

  friend bool operator<(const Score& a, const Score& b) {
    if (!a.defined) return b.defined;
    if (!b.defined) return false;
    return a.value < b.value;
  }
  friend bool operator==(const Score& a, const Score& b) {
    if (!a.defined || !b.defined) return a.defined == b.defined;
    return a.value == b.value;
  }
};

/// Indices of all maximal scores, ascending.
inline std::vector<std::size_t> argmax_set(std::span<const Score> scores) {
  std::vector<std::size_t> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (best.empty() || scores[best.front()] < scores[i]) {
      best.assign(1, i);
    } else if (scores[i] == scores[best.front()]) {
      best.push_back(i);
    }
  }
  return best;
}

/// Uniform choice among maximizers. When every score is undefined this is a
/// uniform random index (the caller may want to log that).
inline std::size_t select_argmax(std::span<const Score> scores, RngStream& rng) {
  const auto best = argmax_set(scores);
  if (best.size() == 1) return best.front();
  return best[rng.below(best.size())];
}

inline std::size_t select_argmax(std::span<const double> values, RngStream& rng) {
  std::vector<Score> s(values.size());
  std::transform(values.begin(), values.end(), s.begin(), [](double v) { return Score::of(v); });
  return select_argmax(std::span<const Score>(s), rng);
}

/// Indices of `k` largest scores in descending order, ties broken uniformly at random.
inline std::vector<std::size_t> top_k(std::span<const Score> scores, std::size_t k, RngStream& rng) {
  std::vector<std::size_t> idx(scores.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // Random permutation first so that the stable sort leaves ties in random order.
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[b] < scores[a]; });
  idx.resize(std::min(k, idx.size()));
  return idx;
}

}  // namespace mbe
