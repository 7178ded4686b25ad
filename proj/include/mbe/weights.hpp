#pragma once

// Multiplier-weight laws, seeded sampling, and the tuning-condition check.

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>

#include "mbe/rng.hpp"
#include "mbe/spec_string.hpp"

namespace mbe {

/// A mean-one multiplier law rho(omega).
class WeightDistribution {
 public:
  enum class Kind { GaussianUnitMean, ExponentialUnit, PoissonUnit, DoubleOrNothing };

  static WeightDistribution gaussian(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw ConfigError("gaussian weight sigma must be positive, got " + std::to_string(sigma));
    }
    return WeightDistribution(Kind::GaussianUnitMean, sigma);
  }
  static WeightDistribution exponential() { return WeightDistribution(Kind::ExponentialUnit, 1.0); }
  static WeightDistribution poisson() { return WeightDistribution(Kind::PoissonUnit, 1.0); }
  static WeightDistribution double_or_nothing() { return WeightDistribution(Kind::DoubleOrNothing, 1.0); }

  /// Parses `gauss:<sigma>`, `exp`, `poisson` or `don`.
  static WeightDistribution parse(std::string_view spec) {
    const SpecString s(spec);
    const std::string& head = s.positional(0);
    if (head == "gauss") {
      if (s.positional().size() != 2) throw ConfigError("weight spec 'gauss' needs a sigma: gauss:<sigma>");
      return gaussian(s.parse_double(s.positional(1), "sigma"));
    }
    if (s.positional().size() != 1) throw ConfigError("weight spec '" + std::string(spec) + "' takes no arguments");
    if (head == "exp") return exponential();
    if (head == "poisson") return poisson();
    if (head == "don") return double_or_nothing();
    throw ConfigError("unknown weight distribution '" + head + "'");
  }

  [[nodiscard]] Kind kind() const { return kind_; }

  /// sigma_omega for the Gaussian law; the standard deviation (1) otherwise.
  [[nodiscard]] double sd() const { return sd_; }

  [[nodiscard]] std::string to_string() const {
    switch (kind_) {
      case Kind::GaussianUnitMean: {
        char buf[64];
        auto r = std::to_chars(buf, buf + sizeof buf, sd_);
        return "gauss:" + std::string(buf, r.ptr);
      }
      case Kind::ExponentialUnit: return "exp";
      case Kind::PoissonUnit: return "poisson";
      case Kind::DoubleOrNothing: return "don";
    }
    return {};
  }

  bool operator==(const WeightDistribution&) const = default;

 private:
  WeightDistribution(Kind k, double sd) : kind_(k), sd_(sd) {}
  Kind kind_;
  double sd_;
};

struct WeightTriplet {
  double omega = 1.0;
  double omega_prime = 1.0;
  double omega_dprime = 1.0;
};

inline double sample_weight(const WeightDistribution& dist, RngStream& rng) {
  switch (dist.kind()) {
    case WeightDistribution::Kind::GaussianUnitMean: return rng.normal(1.0, dist.sd());
    case WeightDistribution::Kind::ExponentialUnit: return rng.exponential();
    case WeightDistribution::Kind::PoissonUnit: return static_cast<double>(rng.poisson(1.0));
    case WeightDistribution::Kind::DoubleOrNothing: return rng.bernoulli(0.5) ? 2.0 : 0.0;
  }
  return 1.0;
}

/// Three independent draws (omega, omega', omega''), all from the same law.
inline WeightTriplet sample_triplet(const WeightDistribution& dist, RngStream& rng) {
  WeightTriplet w;
  w.omega = sample_weight(dist, rng);
  w.omega_prime = sample_weight(dist, rng);
  w.omega_dprime = sample_weight(dist, rng);
  return w;
}

/// lambda scales the pseudo-reward weights; lambda == 0 disables pseudo-rewards.
struct TuningParams {
  double lambda = 0.5;
  WeightDistribution dist = WeightDistribution::gaussian(1.0);
};

enum class TheoryStatus { Satisfied, PracticalOnly };

/// Smallest lambda for which the regret guarantee with N(1, sigma^2) weights applies.
inline double tuning_threshold(double sigma_omega) {
  if (!(sigma_omega > 0.0)) throw ConfigError("sigma_omega must be positive");
  const double base = 1.0 + 4.0 / sigma_omega;
  return base + std::sqrt(4.0 * base / sigma_omega);
}

/// Never blocks a run; `PracticalOnly` only produces a notice. The comparison
/// allows 1e-12 relative slack so a boundary value written in closed form
/// (e.g. 5 + 2 sqrt 5) is not lost to rounding.
inline TheoryStatus validate_tuning(double lambda, double sigma_omega) {
  const double t = tuning_threshold(sigma_omega);
  return lambda >= t * (1.0 - 1e-12) ? TheoryStatus::Satisfied : TheoryStatus::PracticalOnly;
}

inline std::string to_string(TheoryStatus s) {
  return s == TheoryStatus::Satisfied ? "satisfied" : "practical_only";
}

}  // namespace mbe
