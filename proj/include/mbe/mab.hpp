#pragma once

// Full-resample multiplier-bootstrap scores for K-armed bandits.
//
// For an arm with rewards R_1..R_s and fresh weight triplets, the score is
//
//   Y = sum(w_l R_l + lambda w'_l * 1 + lambda w''_l * 0)
//       / sum(w_l + lambda w'_l + lambda w''_l)
//
// i.e. a weighted mean of the observed rewards plus one pseudo-reward of 1
// and one of 0 per observation. With every weight equal to one this collapses
// to (mean + lambda) / (1 + 2 lambda), a monotone map of the sample mean.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "mbe/rng.hpp"
#include "mbe/score.hpp"
#include "mbe/weights.hpp"

namespace mbe {

struct ArmHistory {
  std::vector<double> rewards;

  void add(double r) { rewards.push_back(r); }
  [[nodiscard]] std::size_t count() const { return rewards.size(); }
};

/// Score for one arm under explicit weights (one triplet per observation).
inline Score mbe_mab_score(std::span<const double> rewards, std::span<const WeightTriplet> weights, double lambda) {
  if (rewards.size() != weights.size()) throw std::invalid_argument("mbe_mab_score: one weight triplet per reward");
  if (rewards.empty()) return Score::unexplored();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t l = 0; l < rewards.size(); ++l) {
    const auto& w = weights[l];
    num += w.omega * rewards[l] + lambda * w.omega_prime * 1.0 + lambda * w.omega_dprime * 0.0;
    den += w.omega + lambda * w.omega_prime + lambda * w.omega_dprime;
  }
  return Score::ratio(num, den);
}

/// Fresh triplets for every historical observation of every arm.
inline std::vector<Score> mbe_mab_scores(std::span<const ArmHistory> histories, const TuningParams& params,
                                         RngStream& rng) {
  std::vector<Score> scores(histories.size());
  std::vector<WeightTriplet> w;
  for (std::size_t k = 0; k < histories.size(); ++k) {
    const auto& h = histories[k];
    w.resize(h.count());
    for (auto& t : w) t = sample_triplet(params.dist, rng);
    scores[k] = mbe_mab_score(h.rewards, w, params.lambda);
  }
  return scores;
}

/// Weighted mean without pseudo-rewards.
inline Score naive_mb_score(std::span<const double> rewards, std::span<const double> weights) {
  if (rewards.size() != weights.size()) throw std::invalid_argument("naive_mb_score: one weight per reward");
  if (rewards.empty()) return Score::unexplored();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t l = 0; l < rewards.size(); ++l) {
    num += weights[l] * rewards[l];
    den += weights[l];
  }
  return Score::ratio(num, den);
}

inline std::vector<Score> naive_mb_scores(std::span<const ArmHistory> histories, const WeightDistribution& dist,
                                          RngStream& rng) {
  std::vector<Score> scores(histories.size());
  std::vector<double> w;
  for (std::size_t k = 0; k < histories.size(); ++k) {
    const auto& h = histories[k];
    w.resize(h.count());
    for (auto& x : w) x = sample_weight(dist, rng);
    scores[k] = naive_mb_score(h.rewards, w);
  }
  return scores;
}

}  // namespace mbe
