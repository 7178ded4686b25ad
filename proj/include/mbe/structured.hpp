#pragma once

// Per-item estimates to structured actions, and feedback to per-item observations.
//
// Cascade and semi-bandit policies only need the order of the item scores.
// MNL policies solve an assortment problem over estimated attractiveness and
// known revenues, so their scores are first mapped back to the natural scale.
//
// MNL feedback is consumed in epochs: the same set is offered until a
// no-purchase occurs, and each offered item then contributes one observation
// equal to the number of times it was chosen in that epoch. Under the MNL
// model that count has expectation v_i, so the weighted mean of the epoch
// counts is an estimate of the attractiveness.

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mbe/envs.hpp"
#include "mbe/rng.hpp"
#include "mbe/score.hpp"

namespace mbe {

/// Top-K items by score, highest first.
inline Action assemble_cascade(std::span<const Score> scores, std::size_t slate, RngStream& rng) {
  return top_k(scores, slate, rng);
}

/// Top K/2 items of each group by score; first group's picks come first.
inline Action assemble_semi(std::span<const Score> scores, const SemiBanditEnv& env, RngStream& rng) {
  const std::size_t g = env.group_size();
  Action out;
  for (std::size_t grp = 0; grp < 2; ++grp) {
    const auto part = scores.subspan(grp * g, g);
    for (auto i : top_k(part, env.per_group(), rng)) out.push_back(grp * g + i);
  }
  return out;
}

/// Unexplored (+inf) items are offered first, up to K of them chosen at random.
/// Otherwise the exhaustive best assortment under `v_hat` (negative or
/// undefined estimates are treated as 0).
inline Action assemble_mnl(std::span<const Score> v_hat, std::span<const double> revenues, std::size_t slate,
                           RngStream& rng) {
  std::vector<std::size_t> fresh;
  for (std::size_t i = 0; i < v_hat.size(); ++i)
    if (v_hat[i].is_infinite()) fresh.push_back(i);
  if (!fresh.empty()) {
    for (std::size_t i = fresh.size(); i > 1; --i) std::swap(fresh[i - 1], fresh[rng.below(i)]);
    if (fresh.size() > slate) fresh.resize(slate);
    return fresh;
  }
  std::vector<double> v(v_hat.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = v_hat[i].defined ? std::max(v_hat[i].value, 0.0) : 0.0;
  auto best = mnl_best_assortment(v, revenues, slate);
  if (best.items.empty()) best.items.push_back(rng.below(v.size()));
  return best.items;
}

/// Uniformly random feasible action.
inline Action random_action(const Environment& env, RngStream& rng) {
  return std::visit(
      [&](const auto& e) -> Action {
        using T = std::decay_t<decltype(e)>;
        const std::size_t n = num_items(env);
        auto sample_k = [&](std::size_t offset, std::size_t pool, std::size_t k) {
          std::vector<std::size_t> idx(pool);
          for (std::size_t i = 0; i < pool; ++i) idx[i] = offset + i;
          for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(pool - i)]);
          idx.resize(k);
          return idx;
        };
        if constexpr (std::is_same_v<T, MabEnv> || std::is_same_v<T, LinEnv>) {
          return {rng.below(n)};
        } else if constexpr (std::is_same_v<T, SemiBanditEnv>) {
          Action a = sample_k(0, e.group_size(), e.per_group());
          for (auto i : sample_k(e.group_size(), e.group_size(), e.per_group())) a.push_back(i);
          return a;
        } else {
          return sample_k(0, n, e.slate_size);
        }
      },
      env);
}

/// (item, value) observations carried by one round of non-MNL feedback.
inline std::vector<std::pair<std::size_t, double>> item_observations(const Environment& env, const Action& a,
                                                                     const Feedback& fb) {
  std::vector<std::pair<std::size_t, double>> obs;
  if (std::holds_alternative<MabEnv>(env) || std::holds_alternative<LinEnv>(env)) {
    obs.emplace_back(a[0], fb.reward);
  } else if (std::holds_alternative<CascadeEnv>(env) || std::holds_alternative<SemiBanditEnv>(env)) {
    // Cascade: positions past the first click were never examined and are absent from outcomes.
    for (std::size_t j = 0; j < fb.outcomes.size(); ++j) obs.emplace_back(a[j], fb.outcomes[j]);
  } else {
    throw ContractViolation("item_observations: MNL feedback goes through MnlEpoch");
  }
  return obs;
}

/// Tracks the set offered during the current MNL epoch and its choice counts.
class MnlEpoch {
 public:
  [[nodiscard]] bool active() const { return !offered_.empty(); }
  [[nodiscard]] const Action& offered() const { return offered_; }

  void start(Action set) {
    offered_ = std::move(set);
    counts_.assign(offered_.size(), 0.0);
  }

  /// Records one interaction. Returns the epoch's per-item observations when a
  /// no-purchase closes the epoch, and an empty list otherwise.
  std::vector<std::pair<std::size_t, double>> record(const Feedback& fb) {
    std::vector<std::pair<std::size_t, double>> obs;
    if (!active()) throw ContractViolation("MnlEpoch::record outside an epoch");
    if (fb.choice) {
      for (std::size_t j = 0; j < offered_.size(); ++j)
        if (offered_[j] == *fb.choice) counts_[j] += 1.0;
      return obs;
    }
    for (std::size_t j = 0; j < offered_.size(); ++j) obs.emplace_back(offered_[j], counts_[j]);
    offered_.clear();
    counts_.clear();
    return obs;
  }

 private:
  Action offered_;
  std::vector<double> counts_;
};

}  // namespace mbe
