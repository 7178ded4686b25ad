#pragma once

// Online ensemble approximation of the multiplier bootstrap.
//
// B replicates each keep per-arm weighted sums. A new observation draws one
// weight triplet per replicate and is folded in with O(1) work, so the
// per-round cost does not grow with the history. To act, pick a replicate
// uniformly and play greedily with respect to it.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "mbe/rng.hpp"
#include "mbe/score.hpp"
#include "mbe/weights.hpp"

namespace mbe {

class EnsembleState {
 public:
  /// `pseudo_rewards == false` gives the naive variant: only omega is drawn and
  /// lambda is ignored.
  EnsembleState(std::size_t replicates, std::size_t arms, TuningParams params, bool pseudo_rewards = true)
      : replicates_(replicates),
        arms_(arms),
        params_(params),
        pseudo_(pseudo_rewards),
        num_(replicates * arms, 0.0),
        den_(replicates * arms, 0.0),
        count_(arms, 0) {
    if (replicates == 0) throw ConfigError("ensemble needs at least one replicate");
    if (arms == 0) throw ConfigError("ensemble needs at least one arm");
    if (params.lambda < 0.0) throw ConfigError("lambda must be nonnegative");
  }

  [[nodiscard]] std::size_t replicates() const { return replicates_; }
  [[nodiscard]] std::size_t arms() const { return arms_; }
  [[nodiscard]] const TuningParams& params() const { return params_; }
  [[nodiscard]] bool pseudo_rewards() const { return pseudo_; }
  [[nodiscard]] double lambda() const { return pseudo_ ? params_.lambda : 0.0; }

  [[nodiscard]] double num(std::size_t b, std::size_t arm) const { return num_[b * arms_ + arm]; }
  [[nodiscard]] double den(std::size_t b, std::size_t arm) const { return den_[b * arms_ + arm]; }
  [[nodiscard]] std::size_t count(std::size_t arm) const { return count_[arm]; }

  /// Folds one observation in with caller-supplied weights (one triplet per replicate).
  void update(std::size_t arm, double value, std::span<const WeightTriplet> weights) {
    if (arm >= arms_) throw std::out_of_range("EnsembleState::update: arm out of range");
    if (weights.size() != replicates_) throw std::invalid_argument("EnsembleState::update: one triplet per replicate");
    const double lam = lambda();
    for (std::size_t b = 0; b < replicates_; ++b) {
      const auto& w = weights[b];
      const std::size_t i = b * arms_ + arm;
      if (pseudo_) {
        num_[i] += w.omega * value + lam * w.omega_prime * 1.0 + lam * w.omega_dprime * 0.0;
        den_[i] += w.omega + lam * w.omega_prime + lam * w.omega_dprime;
      } else {
        num_[i] += w.omega * value;
        den_[i] += w.omega;
      }
    }
    ++count_[arm];
  }

  void update(std::size_t arm, double value, RngStream& rng) {
    if (arm >= arms_) throw std::out_of_range("EnsembleState::update: arm out of range");
    const double lam = lambda();
    for (std::size_t b = 0; b < replicates_; ++b) {
      const std::size_t i = b * arms_ + arm;
      if (pseudo_) {
        const WeightTriplet w = sample_triplet(params_.dist, rng);
        num_[i] += w.omega * value + lam * w.omega_prime;
        den_[i] += w.omega + lam * w.omega_prime + lam * w.omega_dprime;
      } else {
        const double w = sample_weight(params_.dist, rng);
        num_[i] += w * value;
        den_[i] += w;
      }
    }
    ++count_[arm];
  }

  /// Scores of one replicate; unseen arms are +inf.
  [[nodiscard]] std::vector<Score> scores(std::size_t b) const {
    std::vector<Score> s(arms_);
    for (std::size_t k = 0; k < arms_; ++k) {
      s[k] = count_[k] == 0 ? Score::unexplored() : Score::ratio(num_[b * arms_ + k], den_[b * arms_ + k]);
    }
    return s;
  }

  std::size_t sample_replicate(RngStream& rng) const { return replicates_ == 1 ? 0 : rng.below(replicates_); }

  /// Scores of a uniformly drawn replicate.
  std::vector<Score> sample_scores(RngStream& rng) const { return scores(sample_replicate(rng)); }

  std::size_t select(RngStream& rng) const {
    const auto s = sample_scores(rng);
    return select_argmax(std::span<const Score>(s), rng);
  }

 private:
  std::size_t replicates_;
  std::size_t arms_;
  TuningParams params_;
  bool pseudo_;
  std::vector<double> num_;
  std::vector<double> den_;
  std::vector<std::size_t> count_;
};

}  // namespace mbe
