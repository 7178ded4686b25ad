#pragma once

// Numerical checks of the tail, MGF, ratio and erfc lemmas behind the regret
// analysis, the asymptotic variance of the shifted bootstrap mean, and the
// exact enumeration for the two-armed double-or-nothing example.
//
// Every Monte-Carlo check derives its stream from (seed, check name) and
// applies an explicit 3-stderr band; the band is part of the reported bound.

#include <boost/math/quadrature/exp_sinh.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mbe/errors.hpp"
#include "mbe/rng.hpp"
#include "mbe/score.hpp"
#include "mbe/weights.hpp"

namespace mbe {

struct CheckRow {
  std::string point;
  double observed = 0.0;
  double bound_lo = -std::numeric_limits<double>::infinity();
  double bound_hi = std::numeric_limits<double>::infinity();
  bool pass = false;
};

struct CheckReport {
  std::string check;
  std::string spec;  ///< grid and sample sizes
  std::uint64_t seed = 0;
  std::vector<CheckRow> rows;

  [[nodiscard]] bool pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return !rows.empty();
  }

  /// Smallest signed distance from an observation to its nearer bound.
  [[nodiscard]] double margin() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) m = std::min({m, r.observed - r.bound_lo, r.bound_hi - r.observed});
    return m;
  }
};

namespace detail {

inline std::string fmt(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

struct Moments {
  double n = 0.0, mean = 0.0, m2 = 0.0;
  void add(double x) {
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  [[nodiscard]] double variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
  [[nodiscard]] double stderr_() const { return n > 0.0 ? std::sqrt(variance() / n) : 0.0; }
};

}  // namespace detail

/// P(Z > x) for standard normal Z.
inline double normal_upper_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// (1/4) e^{-x^2} < P(Z > x) <= (1/2) e^{-x^2/2} on a grid in [0, 6].
inline CheckReport check_gaussian_tail(const std::vector<double>& x_grid) {
  CheckReport rep{"gaussian_tail", "x grid of " + std::to_string(x_grid.size()) + " points", 0, {}};
  for (double x : x_grid) {
    if (!(x >= 0.0 && x <= 6.0)) throw ConfigError("gaussian_tail: grid points must lie in [0, 6]");
    CheckRow r{"x=" + detail::fmt(x), normal_upper_tail(x), 0.25 * std::exp(-x * x), 0.5 * std::exp(-x * x / 2.0)};
    r.pass = r.observed > r.bound_lo && r.observed <= r.bound_hi;
    rep.rows.push_back(r);
  }
  return rep;
}

/// E exp(lambda * Xbar^2) <= e^{9/8} at lambda = n / (8 sigma^2).
/// Rows: the closed-form Gaussian MGF at lambda = 0 and at the edge, and a
/// Monte-Carlo estimate for Rademacher-scaled X_i.
inline CheckReport check_subgaussian_mgf(std::size_t n, double sigma, std::size_t n_samples, std::uint64_t seed) {
  if (n < 1) throw ConfigError("subgaussian_mgf: n must be at least 1");
  if (!(sigma > 0.0)) throw ConfigError("subgaussian_mgf: sigma must be positive");
  if (n_samples < 2) throw ConfigError("subgaussian_mgf: need at least two samples");
  const double bound = std::exp(9.0 / 8.0);
  const double nd = static_cast<double>(n);
  const double lam = nd / (8.0 * sigma * sigma);
  CheckReport rep{"subgaussian_mgf", "n=" + std::to_string(n) + " sigma=" + detail::fmt(sigma) +
                                         " samples=" + std::to_string(n_samples), seed, {}};
  // Xbar ~ N(0, sigma^2/n): E exp(l Xbar^2) = (1 - 2 l sigma^2 / n)^{-1/2}.
  auto gaussian_mgf = [&](double l) { return 1.0 / std::sqrt(1.0 - 2.0 * l * sigma * sigma / nd); };
  for (double l : {0.0, lam}) {
    CheckRow r{"gaussian lambda=" + detail::fmt(l), gaussian_mgf(l)};
    r.bound_hi = bound;
    r.pass = r.observed <= r.bound_hi;
    rep.rows.push_back(r);
  }
  RngStream rng(seed, {hash_label("subgaussian_mgf")});
  detail::Moments m;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double s = 2.0 * static_cast<double>(rng.binomial(n, 0.5)) - nd;  // sum of n signs
    const double xbar = sigma * s / nd;
    m.add(std::exp(lam * xbar * xbar));
  }
  CheckRow r{"rademacher lambda=" + detail::fmt(lam), m.mean};
  r.bound_hi = bound + 3.0 * m.stderr_();
  r.pass = r.observed <= r.bound_hi;
  rep.rows.push_back(r);
  return rep;
}

/// P(|X|/|Y| > c) <= 2 P(X > cY) + P(Y < 0) for independent X ~ N(0, sd_x^2),
/// Y ~ N(mean_y, sd_y^2). Both sides come from the same draws; the band is
/// 3 stderr of the paired difference.
inline CheckReport check_gaussian_ratio(const std::vector<double>& c_grid, double mean_y, std::size_t n_samples,
                                        std::uint64_t seed, double sd_x = 1.0, double sd_y = 1.0) {
  if (!(mean_y > 0.0)) throw ConfigError("gaussian_ratio: E[Y] must be positive");
  if (n_samples < 2) throw ConfigError("gaussian_ratio: need at least two samples");
  CheckReport rep{"gaussian_ratio", "mean_y=" + detail::fmt(mean_y) + " sd_x=" + detail::fmt(sd_x) +
                                        " sd_y=" + detail::fmt(sd_y) + " samples=" + std::to_string(n_samples),
                  seed, {}};
  for (double c : c_grid) {
    if (!(c > 0.0)) throw ConfigError("gaussian_ratio: c must be positive");
    RngStream rng(seed, {hash_label("gaussian_ratio"), hash_label(detail::fmt(c))});
    detail::Moments lhs, rhs, diff;
    for (std::size_t i = 0; i < n_samples; ++i) {
      const double x = rng.normal(0.0, sd_x);
      const double y = rng.normal(mean_y, sd_y);
      const double l = std::abs(x) > c * std::abs(y) ? 1.0 : 0.0;
      const double rr = 2.0 * (x > c * y ? 1.0 : 0.0) + (y < 0.0 ? 1.0 : 0.0);
      lhs.add(l);
      rhs.add(rr);
      diff.add(l - rr);
    }
    CheckRow r{"c=" + detail::fmt(c), lhs.mean};
    r.bound_hi = rhs.mean + 3.0 * diff.stderr_();
    r.pass = r.observed <= r.bound_hi;
    rep.rows.push_back(r);
  }
  return rep;
}

/// (2 e^{x^2} / sqrt(pi)) * int_x^inf e^{-t^2} dt by exp-sinh quadrature of the
/// shifted integrand e^{-2xu - u^2} on [0, inf).
inline double scaled_erfc_quadrature(double x) {
  boost::math::quadrature::exp_sinh<double> integrator;
  const double v = integrator.integrate([x](double u) { return std::exp(-2.0 * x * u - u * u); });
  return 2.0 / std::sqrt(std::numbers::pi) * v;
}

/// Scaled erfc <= 1 (+1e-10 for quadrature error).
inline CheckReport check_erfc_bound(const std::vector<double>& x_grid) {
  CheckReport rep{"erfc_bound", "x grid of " + std::to_string(x_grid.size()) + " points", 0, {}};
  for (double x : x_grid) {
    if (!(x >= 0.0)) throw ConfigError("erfc_bound: x must be nonnegative");
    CheckRow r{"x=" + detail::fmt(x), scaled_erfc_quadrature(x)};
    r.bound_lo = 0.0;
    r.bound_hi = 1.0 + 1e-10;
    r.pass = r.observed <= r.bound_hi && r.observed > r.bound_lo;
    rep.rows.push_back(r);
  }
  return rep;
}

/// Variance the check compares against: (sd^2 + 2) sigma_w^2 / (1 + 2 lambda)^2.
inline double shifted_mean_target_variance(double lambda, double sigma_omega, double reward_sd) {
  return (reward_sd * reward_sd + 2.0) * sigma_omega * sigma_omega / ((1.0 + 2.0 * lambda) * (1.0 + 2.0 * lambda));
}

/// First-order (delta-method) variance of sqrt(s) * Ybar over the weights,
/// given a fixed history with sample mean `rbar` and sample variance `rvar`.
inline double shifted_mean_delta_variance(double lambda, double sigma_omega, double rbar, double rvar) {
  const double c = (rbar + lambda) / (1.0 + 2.0 * lambda);
  const double spread = rvar + (rbar - c) * (rbar - c) + lambda * lambda * ((1.0 - c) * (1.0 - c) + c * c);
  return sigma_omega * sigma_omega * spread / ((1.0 + 2.0 * lambda) * (1.0 + 2.0 * lambda));
}

struct ShiftedMeanSample {
  double mc_variance = 0.0;
  double delta_variance = 0.0;  ///< first-order prediction for this history
  double rbar = 0.0;
};

/// Draws one history of `s` N(mu, reward_sd^2) rewards, then `n_reps` sets of
/// N(1, sigma_w^2) weights, and returns the sample variance of
/// sqrt(s) * (Ybar - (mu + lambda) / (1 + 2 lambda)).
inline ShiftedMeanSample sample_shifted_mean(double lambda, double sigma_omega, double reward_sd, std::size_t s,
                                             std::size_t n_reps, RngStream& rng, double mu = 0.5) {
  std::vector<double> rewards(s);
  detail::Moments hist;
  for (auto& r : rewards) {
    r = rng.normal(mu, reward_sd);
    hist.add(r);
  }
  const WeightDistribution dist = WeightDistribution::gaussian(sigma_omega);
  const double centre = (mu + lambda) / (1.0 + 2.0 * lambda);
  const double root_s = std::sqrt(static_cast<double>(s));
  detail::Moments stat;
  for (std::size_t rep = 0; rep < n_reps; ++rep) {
    double num = 0.0, den = 0.0;
    for (double r : rewards) {
      const auto w = sample_triplet(dist, rng);
      num += w.omega * r + lambda * w.omega_prime;
      den += w.omega + lambda * w.omega_prime + lambda * w.omega_dprime;
    }
    stat.add(root_s * (num / den - centre));
  }
  const double rvar = hist.m2 / hist.n;
  return {stat.variance(), shifted_mean_delta_variance(lambda, sigma_omega, hist.mean, rvar), hist.mean};
}

/// Monte-Carlo variance of the shifted mean against the closed-form target,
/// within 10% relative tolerance (absolute 1e-6 when the target is near 0).
inline CheckReport check_shifted_mean_clt(double lambda, double sigma_omega, double reward_sd, std::size_t s,
                                          std::size_t n_reps, std::uint64_t seed) {
  if (s < 1000) throw ConfigError("shifted_mean_clt: s must be at least 1000");
  if (n_reps < 2) throw ConfigError("shifted_mean_clt: need at least two replicates");
  if (!(lambda >= 0.0 && sigma_omega > 0.0 && reward_sd >= 0.0)) throw ConfigError("shifted_mean_clt: bad parameters");
  RngStream rng(seed, {hash_label("shifted_mean_clt")});
  const auto sample = sample_shifted_mean(lambda, sigma_omega, reward_sd, s, n_reps, rng);
  const double target = shifted_mean_target_variance(lambda, sigma_omega, reward_sd);
  const double tol = std::max(0.1 * target, 1e-6);
  CheckReport rep{"shifted_mean_clt", "lambda=" + detail::fmt(lambda) + " sigma_w=" + detail::fmt(sigma_omega) +
                                          " reward_sd=" + detail::fmt(reward_sd) + " s=" + std::to_string(s) +
                                          " reps=" + std::to_string(n_reps) +
                                          " delta_method=" + detail::fmt(sample.delta_variance),
                  seed, {}};
  CheckRow r{"variance", sample.mc_variance, target - tol, target + tol};
  r.pass = r.observed >= r.bound_lo && r.observed <= r.bound_hi;
  rep.rows.push_back(r);
  return rep;
}

/// E exp(-s / (a Xbar + b)) for Xbar the mean of n Exp(1) draws should
/// decrease in s. Rows compare successive grid points on common draws.
inline CheckReport check_subexponential_decay(const std::vector<double>& s_grid, std::size_t n, double a, double b,
                                              std::size_t n_samples, std::uint64_t seed) {
  if (s_grid.size() < 2) throw ConfigError("subexponential_decay: need at least two grid points");
  if (!(a > 0.0 && b > 0.0) || n < 1 || n_samples < 1) throw ConfigError("subexponential_decay: bad parameters");
  RngStream rng(seed, {hash_label("subexponential_decay")});
  std::vector<double> xbar(n_samples);
  for (auto& x : xbar) x = rng.gamma(static_cast<double>(n)) / static_cast<double>(n);
  std::vector<double> e;
  for (double s : s_grid) {
    double acc = 0.0;
    for (double x : xbar) acc += std::exp(-s / (a * x + b));
    e.push_back(acc / static_cast<double>(n_samples));
  }
  CheckReport rep{"subexponential_decay", "n=" + std::to_string(n) + " a=" + detail::fmt(a) + " b=" + detail::fmt(b) +
                                              " samples=" + std::to_string(n_samples), seed, {}};
  for (std::size_t i = 1; i < e.size(); ++i) {
    CheckRow r{"s=" + detail::fmt(s_grid[i]), e[i]};
    r.bound_hi = e[i - 1];
    r.pass = r.observed < r.bound_hi;
    rep.rows.push_back(r);
  }
  return rep;
}

struct Example1Result {
  int count = 0;             ///< tuples out of 64 with Ybar_1 > Ybar_2
  int undefined_wins = 0;    ///< of those, tuples where Ybar_2 is undefined
  [[nodiscard]] double probability() const { return count / 64.0; }
};

/// Exact P(Ybar_1 > Ybar_2) over the 64 double-or-nothing weight tuples for
/// arm 1 with history {0} and arm 2 with history {1}. An undefined score
/// (zero denominator) ranks below every defined score.
inline Example1Result enumerate_example1(double lambda) {
  if (!(lambda >= 0.0)) throw ConfigError("enumerate_example1: lambda must be nonnegative");
  Example1Result res;
  for (int mask = 0; mask < 64; ++mask) {
    const double w1 = (mask & 1) ? 2.0 : 0.0, w1p = (mask & 2) ? 2.0 : 0.0, w1pp = (mask & 4) ? 2.0 : 0.0;
    const double w2 = (mask & 8) ? 2.0 : 0.0, w2p = (mask & 16) ? 2.0 : 0.0, w2pp = (mask & 32) ? 2.0 : 0.0;
    const long double n1 = lambda * w1p, d1 = w1 + lambda * w1p + lambda * w1pp;
    const long double n2 = w2 + lambda * w2p, d2 = w2 + lambda * w2p + lambda * w2pp;
    bool wins = false;
    if (d1 > 0 && d2 > 0) wins = n1 * d2 > n2 * d1;  // cross-multiplied, no rounding from division
    else if (d1 > 0) wins = true;
    if (wins) {
      ++res.count;
      if (d2 == 0) ++res.undefined_wins;
    }
  }
  return res;
}

/// The two-arm enumeration as a report row: lambda > 0 needs at least 1/64,
/// lambda = 0 is reported against exactly 0.
inline CheckReport check_example1(const std::vector<double>& lambdas) {
  CheckReport rep{"example1_enumeration", "64 double-or-nothing tuples", 0, {}};
  for (double l : lambdas) {
    const auto e = enumerate_example1(l);
    CheckRow r{"lambda=" + detail::fmt(l) + " count=" + std::to_string(e.count) +
                   " undefined_wins=" + std::to_string(e.undefined_wins),
               e.probability()};
    if (l > 0.0) {
      r.bound_lo = 1.0 / 64.0;
      r.bound_hi = 1.0;
    } else {
      r.bound_lo = 0.0;
      r.bound_hi = 0.0;
    }
    r.pass = r.observed >= r.bound_lo && r.observed <= r.bound_hi;
    rep.rows.push_back(r);
  }
  return rep;
}

inline std::vector<double> linspace_grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (int i = 0; lo + i * step <= hi + 1e-12; ++i) g.push_back(lo + i * step);
  return g;
}

/// The default battery run by the `theorycheck` subcommand.
inline std::vector<CheckReport> run_theory_checks(std::uint64_t seed) {
  const auto x = linspace_grid(0.0, 5.0, 0.5);
  return {
      check_gaussian_tail(x),
      check_subgaussian_mgf(100, 1.0, 1'000'000, seed),
      check_gaussian_ratio({0.5, 1.0, 2.0, 10.0, 1000.0}, 3.0, 1'000'000, seed),
      check_erfc_bound(x),
      check_shifted_mean_clt(0.5, 1.0, 1.0, 1000, 20'000, seed),
      check_subexponential_decay({1.0, 2.0, 4.0, 8.0, 16.0}, 20, 1.0, 1.0, 100'000, seed),
      check_example1({0.0, 0.5, 1e6, 1e7}),
  };
}

inline void write_check_csv(std::ostream& out, const std::vector<CheckReport>& reports) {
  out << "check,point,observed,bound_lo,bound_hi,pass\n";
  for (const auto& rep : reports)
    for (const auto& r : rep.rows)
      out << rep.check << ',' << r.point << ',' << detail::fmt(r.observed) << ',' << detail::fmt(r.bound_lo) << ','
          << detail::fmt(r.bound_hi) << ',' << (r.pass ? "true" : "false") << '\n';
}

inline void write_check_text(std::ostream& out, const std::vector<CheckReport>& reports) {
  for (const auto& rep : reports) {
    out << (rep.pass() ? "PASS " : "FAIL ") << rep.check << "  [" << rep.spec << ", seed " << rep.seed
        << ", margin " << detail::fmt(rep.margin()) << "]\n";
    for (const auto& r : rep.rows)
      out << "    " << (r.pass ? "ok  " : "bad ") << r.point << ": " << detail::fmt(r.observed) << " in ["
          << detail::fmt(r.bound_lo) << ", " << detail::fmt(r.bound_hi) << "]\n";
  }
}

}  // namespace mbe
