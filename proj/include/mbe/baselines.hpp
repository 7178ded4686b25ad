#pragma once

// Reference policies: Thompson sampling (Beta-Bernoulli, Gaussian with known
// noise), perturbed-history exploration (PHE) and epsilon-greedy.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mbe/errors.hpp"
#include "mbe/rng.hpp"
#include "mbe/score.hpp"

namespace mbe {

struct BetaPosterior {
  std::vector<double> alpha;
  std::vector<double> beta;

  BetaPosterior(std::size_t arms, double a0 = 1.0, double b0 = 1.0) : alpha(arms, a0), beta(arms, b0) {
    if (!(a0 > 0.0 && b0 > 0.0)) throw ConfigError("Beta prior parameters must be positive");
  }

  [[nodiscard]] double mean(std::size_t k) const { return alpha[k] / (alpha[k] + beta[k]); }

  void update(std::size_t arm, double reward) {
    if (reward == 1.0) alpha.at(arm) += 1.0;
    else if (reward == 0.0) beta.at(arm) += 1.0;
    else throw ContractViolation("Beta-Bernoulli Thompson sampling needs binary rewards");
  }

  std::vector<Score> sample(RngStream& rng) const {
    std::vector<Score> s(alpha.size());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = Score::of(rng.beta(alpha[k], beta[k]));
    return s;
  }
};

/// Conjugate Normal posterior per arm with known noise sd.
struct GaussianPosterior {
  std::vector<double> mean;
  std::vector<double> precision;
  double noise_sd = 1.0;

  GaussianPosterior(std::size_t arms, double prior_mean, double prior_sd, double noise)
      : mean(arms, prior_mean), precision(arms, 1.0 / (prior_sd * prior_sd)), noise_sd(noise) {
    if (!(prior_sd > 0.0)) throw ConfigError("Gaussian prior sd must be positive");
    if (!(noise > 0.0)) throw ConfigError("Gaussian noise sd must be positive");
  }

  void update(std::size_t arm, double reward) {
    const double obs_prec = 1.0 / (noise_sd * noise_sd);
    const double prec = precision.at(arm) + obs_prec;
    mean[arm] = (mean[arm] * precision[arm] + reward * obs_prec) / prec;
    precision[arm] = prec;
  }

  std::vector<Score> sample(RngStream& rng) const {
    std::vector<Score> s(mean.size());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = Score::of(rng.normal(mean[k], 1.0 / std::sqrt(precision[k])));
    return s;
  }
};

/// epsilon_t = min(1, a / (2 sqrt(t))).
struct EGSchedule {
  double a = 1.0;

  [[nodiscard]] double epsilon(std::size_t t) const {
    if (t == 0) throw ContractViolation("epsilon-greedy rounds are 1-based");
    return std::min(1.0, a / (2.0 * std::sqrt(static_cast<double>(t))));
  }
};

enum class PheNoise { Bernoulli, Gaussian, Exponential, Poisson };

/// Number of pseudo-observations added for an arm seen `s` times.
inline std::size_t phe_pseudo_count(double a, std::size_t s) {
  return static_cast<std::size_t>(std::ceil(a * static_cast<double>(s)));
}

/// (sum R + sum Z) / (s + m).
inline double phe_perturbed_mean(double reward_sum, std::size_t s, double pseudo_sum, std::size_t m) {
  return (reward_sum + pseudo_sum) / static_cast<double>(s + m);
}

/// Per-arm reward sums and counts with family-matched perturbations.
struct PheState {
  std::vector<double> sum;
  std::vector<std::size_t> count;
  double a = 1.0;
  PheNoise noise = PheNoise::Bernoulli;
  double noise_sd = 1.0;

  PheState(std::size_t arms, double scale, PheNoise family, double sd = 1.0)
      : sum(arms, 0.0), count(arms, 0), a(scale), noise(family), noise_sd(sd) {
    if (!(scale > 0.0)) throw ConfigError("PHE perturbation scale a must be positive");
  }

  void update(std::size_t arm, double reward) {
    sum.at(arm) += reward;
    ++count[arm];
  }

  /// Sum of m draws from the family at the plug-in mean, sampled in closed form.
  double pseudo_sum(double plug_in, std::size_t m, RngStream& rng) const {
    const double md = static_cast<double>(m);
    switch (noise) {
      case PheNoise::Bernoulli: return static_cast<double>(rng.binomial(m, std::clamp(plug_in, 0.0, 1.0)));
      case PheNoise::Gaussian: return rng.normal(md * plug_in, std::sqrt(md) * noise_sd);
      case PheNoise::Exponential: return plug_in > 0.0 ? plug_in * rng.gamma(md) : 0.0;
      case PheNoise::Poisson: return static_cast<double>(rng.poisson(md * std::max(plug_in, 0.0)));
    }
    return 0.0;
  }

  std::vector<Score> sample(RngStream& rng) const {
    std::vector<Score> s(sum.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (count[k] == 0) {
        s[k] = Score::unexplored();
        continue;
      }
      const std::size_t m = phe_pseudo_count(a, count[k]);
      const double z = pseudo_sum(sum[k] / static_cast<double>(count[k]), m, rng);
      s[k] = Score::of(phe_perturbed_mean(sum[k], count[k], z, m));
    }
    return s;
  }
};

}  // namespace mbe
