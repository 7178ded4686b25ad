#pragma once

// Synthetic stochastic bandit environments.
//
// Every environment is immutable once built. Pulls take an explicit
// RngStream, so one instance can serve many concurrent runs. Regret is
// charged with expected values: `expected_value(env, action)` and
// `optimal_value(env)` are the two halves of the per-round pseudo-regret.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mbe/errors.hpp"
#include "mbe/linear.hpp"
#include "mbe/rng.hpp"
#include "mbe/spec_string.hpp"

namespace mbe {

/// An arm index (size 1) or an ordered slate / item subset.
using Action = std::vector<std::size_t>;

struct Feedback {
  /// Realized scalar reward of the action.
  double reward = 0.0;
  /// Cascade: Bernoulli outcomes of examined positions. Semi-bandit: one reward per chosen item, in action order.
  std::vector<double> outcomes;
  /// Cascade: slate position of the click, if any.
  std::optional<std::size_t> click_position;
  /// MNL: chosen item index; empty means no purchase.
  std::optional<std::size_t> choice;
};

enum class RewardFamily { Bernoulli, Gaussian, Exponential };

inline std::string to_string(RewardFamily f) {
  switch (f) {
    case RewardFamily::Bernoulli: return "bernoulli";
    case RewardFamily::Gaussian: return "gauss";
    case RewardFamily::Exponential: return "exp";
  }
  return {};
}

struct MabEnv {
  std::vector<double> means;
  RewardFamily family = RewardFamily::Bernoulli;
  double noise_sd = 1.0;
  /// Beta(alpha, beta) generator of the means, when the instance was sampled.
  std::optional<std::pair<double, double>> generator;

  void validate() const {
    if (means.size() < 2) throw ConfigError("MAB environment needs at least two arms");
    for (double m : means) {
      if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("MAB means must lie in [0, 1]");
      if (family == RewardFamily::Exponential && !(m > 0.0)) {
        throw ConfigError("exponential arms need positive means");
      }
    }
    if (family == RewardFamily::Gaussian && !(noise_sd > 0.0)) throw ConfigError("Gaussian noise sd must be positive");
  }
};

/// Fixed-arm linear bandit with Bernoulli(x_k^T theta) rewards. Rows of `features` are arms.
struct LinEnv {
  Vector theta;
  Matrix features;
  std::size_t low_rank_arms = 0;

  [[nodiscard]] std::size_t arms() const { return static_cast<std::size_t>(features.rows()); }
  [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(theta.size()); }
  [[nodiscard]] double mean(std::size_t k) const { return features.row(static_cast<Eigen::Index>(k)).dot(theta); }
};

struct CascadeEnv {
  std::vector<double> attractions;
  std::size_t slate_size = 1;
};

/// Items [0, L/2) form the first group and [L/2, L) the second; an action picks K/2 from each.
struct SemiBanditEnv {
  std::vector<double> item_means;
  std::size_t slate_size = 2;
  double noise_sd = 0.1;

  [[nodiscard]] std::size_t group_size() const { return item_means.size() / 2; }
  [[nodiscard]] std::size_t per_group() const { return slate_size / 2; }
  [[nodiscard]] std::size_t group_of(std::size_t item) const { return item < group_size() ? 0 : 1; }
};

struct MnlEnv {
  std::vector<double> attractiveness;
  std::vector<double> revenues;
  std::size_t slate_size = 1;
};

using Environment = std::variant<MabEnv, LinEnv, CascadeEnv, SemiBanditEnv, MnlEnv>;

// ---------------------------------------------------------------------------
// Instance sampling

inline MabEnv sample_mab_instance(std::size_t arms, double alpha, RngStream& rng,
                                  RewardFamily family = RewardFamily::Bernoulli, double noise_sd = 1.0) {
  if (arms < 2) throw ConfigError("sample_mab_instance: K must be at least 2");
  if (!(alpha > 0.0)) throw ConfigError("sample_mab_instance: alpha must be positive");
  constexpr double kBeta = 8.0;
  MabEnv env;
  env.family = family;
  env.noise_sd = noise_sd;
  env.generator = std::make_pair(alpha, kBeta);
  env.means.resize(arms);
  for (auto& m : env.means) {
    m = rng.beta(alpha, kBeta);
    // Exponential arms need a strictly positive mean.
    if (family == RewardFamily::Exponential) m = std::max(m, 1e-12);
  }
  return env;
}

/// 90% of the arms are A b (one loading matrix A per instance, fresh b per arm,
/// rank <= 5), the rest uniform on (0,1)^p; theta uniform on [0,1]^p. Features
/// are then divided by max_k x_k^T theta so the best arm has mean exactly 1.
inline LinEnv sample_linear_instance(std::size_t dim, std::size_t arms, RngStream& rng) {
  constexpr std::size_t kRank = 5;
  if (dim < kRank) throw ConfigError("sample_linear_instance: p must be at least 5");
  if (arms < dim) throw ConfigError("sample_linear_instance: K must be at least p");
  const auto p = static_cast<Eigen::Index>(dim);
  LinEnv env;
  env.low_rank_arms = (arms * 9 + 5) / 10;
  env.features.resize(static_cast<Eigen::Index>(arms), p);

  Matrix loading(p, static_cast<Eigen::Index>(kRank));
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(kRank); ++j) loading(i, j) = rng.uniform();

  for (std::size_t k = 0; k < arms; ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    if (k < env.low_rank_arms) {
      Vector coef(static_cast<Eigen::Index>(kRank));
      for (auto& c : coef) c = rng.uniform();
      env.features.row(row) = (loading * coef).transpose();
    } else {
      for (Eigen::Index i = 0; i < p; ++i) env.features(row, i) = rng.uniform_pos();
    }
  }
  env.theta.resize(p);
  for (auto& t : env.theta) t = rng.uniform();

  const double best = (env.features * env.theta).maxCoeff();
  if (!(best > 0.0)) throw NumericError("sample_linear_instance: degenerate instance");
  env.features /= best;
  return env;
}

inline CascadeEnv sample_cascade_instance(std::size_t items, std::size_t slate, double wmax, RngStream& rng) {
  if (slate == 0 || slate > items) throw ConfigError("cascade: need 1 <= K <= L");
  CascadeEnv env;
  env.slate_size = slate;
  env.attractions.resize(items);
  for (auto& w : env.attractions) w = wmax * rng.uniform();
  return env;
}

inline SemiBanditEnv sample_semi_instance(std::size_t items, std::size_t slate, double wmax, double noise_sd,
                                          RngStream& rng) {
  if (slate == 0 || slate % 2 != 0) throw ConfigError("semi-bandit: K must be a positive even number");
  if (items % 2 != 0 || slate / 2 > items / 2) throw ConfigError("semi-bandit: L must be even with K/2 <= L/2");
  if (!(noise_sd >= 0.0)) throw ConfigError("semi-bandit: noise sd must be nonnegative");
  SemiBanditEnv env;
  env.slate_size = slate;
  env.noise_sd = noise_sd;
  env.item_means.resize(items);
  for (auto& m : env.item_means) m = wmax * rng.uniform();
  return env;
}

inline MnlEnv sample_mnl_instance(std::size_t items, std::size_t slate, double vmax, bool unit_revenue,
                                  RngStream& rng) {
  if (slate == 0 || slate > items) throw ConfigError("mnl: need 1 <= K <= L");
  MnlEnv env;
  env.slate_size = slate;
  env.attractiveness.resize(items);
  env.revenues.resize(items);
  for (auto& v : env.attractiveness) v = vmax * rng.uniform_pos();
  for (auto& r : env.revenues) r = unit_revenue ? 1.0 : rng.uniform_pos();
  return env;
}

// ---------------------------------------------------------------------------
// MNL assortment helpers

/// Expected revenue of offering `set`: sum v_i r_i / (1 + sum v_i).
inline double mnl_expected_revenue(std::span<const double> v, std::span<const double> r,
                                   std::span<const std::size_t> set) {
  double num = 0.0;
  double den = 1.0;
  for (auto i : set) {
    num += v[i] * r[i];
    den += v[i];
  }
  return num / den;
}

struct Assortment {
  std::vector<std::size_t> items;
  double revenue = 0.0;
};

/// Exhaustive search over all nonempty subsets of size <= max_size. Ties keep
/// the lexicographically first subset in enumeration order. Items with zero
/// attractiveness cannot change the revenue and are never offered.
inline Assortment mnl_best_assortment(std::span<const double> v, std::span<const double> r, std::size_t max_size) {
  Assortment best;
  best.revenue = -1.0;
  std::vector<std::size_t> cur;
  const std::size_t n = v.size();
  // Depth-first enumeration carrying the running numerator/denominator.
  auto rec = [&](auto&& self, std::size_t start, double num, double den) -> void {
    for (std::size_t i = start; i < n; ++i) {
      if (!(v[i] > 0.0)) continue;
      const double nn = num + v[i] * r[i];
      const double dd = den + v[i];
      cur.push_back(i);
      const double rev = nn / dd;
      if (rev > best.revenue) {
        best.revenue = rev;
        best.items = cur;
      }
      if (cur.size() < max_size) self(self, i + 1, nn, dd);
      cur.pop_back();
    }
  };
  rec(rec, 0, 0.0, 1.0);
  if (best.revenue < 0.0) best.revenue = 0.0;
  return best;
}

/// MNL choice probabilities for `set`; the last entry is the no-purchase probability.
inline std::vector<double> mnl_choice_probabilities(std::span<const double> v, std::span<const std::size_t> set) {
  double den = 1.0;
  for (auto i : set) den += v[i];
  std::vector<double> p;
  p.reserve(set.size() + 1);
  for (auto i : set) p.push_back(v[i] / den);
  p.push_back(1.0 / den);
  return p;
}

// ---------------------------------------------------------------------------
// Action validation, pulls and values

inline std::size_t num_items(const Environment& env) {
  return std::visit(
      [](const auto& e) -> std::size_t {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, MabEnv>) return e.means.size();
        else if constexpr (std::is_same_v<T, LinEnv>) return e.arms();
        else if constexpr (std::is_same_v<T, CascadeEnv>) return e.attractions.size();
        else if constexpr (std::is_same_v<T, SemiBanditEnv>) return e.item_means.size();
        else return e.attractiveness.size();
      },
      env);
}

inline void check_distinct(const Action& a, std::size_t n, const char* what) {
  std::vector<bool> seen(n, false);
  for (auto i : a) {
    if (i >= n) throw ContractViolation(std::string(what) + ": item index out of range");
    if (seen[i]) throw ContractViolation(std::string(what) + ": repeated item in action");
    seen[i] = true;
  }
}

inline void validate_action(const Environment& env, const Action& a) {
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, MabEnv> || std::is_same_v<T, LinEnv>) {
          if (a.size() != 1 || a[0] >= num_items(env)) throw ContractViolation("invalid arm index");
        } else if constexpr (std::is_same_v<T, CascadeEnv>) {
          if (a.size() != e.slate_size) throw ContractViolation("cascade: slate must have exactly K items");
          check_distinct(a, e.attractions.size(), "cascade");
        } else if constexpr (std::is_same_v<T, SemiBanditEnv>) {
          if (a.size() != e.slate_size) throw ContractViolation("semi-bandit: action must have exactly K items");
          check_distinct(a, e.item_means.size(), "semi-bandit");
          std::size_t first = 0;
          for (auto i : a) first += e.group_of(i) == 0 ? 1 : 0;
          if (first != e.per_group()) throw ContractViolation("semi-bandit: need K/2 items from each group");
        } else {
          if (a.empty() || a.size() > e.slate_size) throw ContractViolation("mnl: offer between 1 and K items");
          check_distinct(a, e.attractiveness.size(), "mnl");
        }
      },
      env);
}

inline Feedback pull(const Environment& env, const Action& a, RngStream& rng) {
  validate_action(env, a);
  Feedback fb;
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, MabEnv>) {
          const double mu = e.means[a[0]];
          switch (e.family) {
            case RewardFamily::Bernoulli: fb.reward = rng.bernoulli(mu) ? 1.0 : 0.0; break;
            case RewardFamily::Gaussian: fb.reward = rng.normal(mu, e.noise_sd); break;
            case RewardFamily::Exponential: fb.reward = mu * rng.exponential(); break;
          }
        } else if constexpr (std::is_same_v<T, LinEnv>) {
          fb.reward = rng.bernoulli(e.mean(a[0])) ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, CascadeEnv>) {
          for (std::size_t pos = 0; pos < a.size(); ++pos) {
            const bool click = rng.bernoulli(e.attractions[a[pos]]);
            fb.outcomes.push_back(click ? 1.0 : 0.0);
            if (click) {
              fb.click_position = pos;
              break;
            }
          }
          fb.reward = fb.click_position ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, SemiBanditEnv>) {
          for (auto i : a) {
            const double r = rng.normal(e.item_means[i], e.noise_sd);
            fb.outcomes.push_back(r);
            fb.reward += r;
          }
        } else {
          const auto probs = mnl_choice_probabilities(e.attractiveness, a);
          double u = rng.uniform();
          for (std::size_t j = 0; j < a.size(); ++j) {
            if (u < probs[j]) {
              fb.choice = a[j];
              fb.reward = e.revenues[a[j]];
              break;
            }
            u -= probs[j];
          }
        }
      },
      env);
  return fb;
}

inline double expected_value(const Environment& env, const Action& a) {
  validate_action(env, a);
  return std::visit(
      [&](const auto& e) -> double {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, MabEnv>) {
          return e.means[a[0]];
        } else if constexpr (std::is_same_v<T, LinEnv>) {
          return e.mean(a[0]);
        } else if constexpr (std::is_same_v<T, CascadeEnv>) {
          double none = 1.0;
          for (auto i : a) none *= 1.0 - e.attractions[i];
          return 1.0 - none;
        } else if constexpr (std::is_same_v<T, SemiBanditEnv>) {
          double s = 0.0;
          for (auto i : a) s += e.item_means[i];
          return s;
        } else {
          return mnl_expected_revenue(e.attractiveness, e.revenues, a);
        }
      },
      env);
}

/// The best expected value achievable by any feasible action.
inline double optimal_value(const Environment& env) {
  return std::visit(
      [](const auto& e) -> double {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, MabEnv>) {
          return *std::max_element(e.means.begin(), e.means.end());
        } else if constexpr (std::is_same_v<T, LinEnv>) {
          return (e.features * e.theta).maxCoeff();
        } else if constexpr (std::is_same_v<T, CascadeEnv>) {
          std::vector<double> w = e.attractions;
          std::sort(w.begin(), w.end(), std::greater<>());
          double none = 1.0;
          for (std::size_t i = 0; i < e.slate_size; ++i) none *= 1.0 - w[i];
          return 1.0 - none;
        } else if constexpr (std::is_same_v<T, SemiBanditEnv>) {
          const std::size_t g = e.group_size();
          double s = 0.0;
          for (std::size_t grp = 0; grp < 2; ++grp) {
            std::vector<double> m(e.item_means.begin() + static_cast<std::ptrdiff_t>(grp * g),
                                  e.item_means.begin() + static_cast<std::ptrdiff_t>((grp + 1) * g));
            std::sort(m.begin(), m.end(), std::greater<>());
            for (std::size_t i = 0; i < e.per_group(); ++i) s += m[i];
          }
          return s;
        } else {
          return mnl_best_assortment(e.attractiveness, e.revenues, e.slate_size).revenue;
        }
      },
      env);
}

// ---------------------------------------------------------------------------
// Environment spec strings

/// A parsed environment spec; `instantiate` draws one fresh instance.
class EnvSpec {
 public:
  enum class Kind { Mab, Linear, Cascade, Semi, Mnl };

  explicit EnvSpec(const std::string& text) : spec_(text) {
    const std::string head = spec_.positional(0);
    if (head == "mab") {
      kind_ = Kind::Mab;
      spec_.require_keys({"K", "alpha", "sd", "means"});
      const std::string fam = spec_.positional(1);
      if (fam == "bernoulli") family_ = RewardFamily::Bernoulli;
      else if (fam == "gauss") family_ = RewardFamily::Gaussian;
      else if (fam == "exp") family_ = RewardFamily::Exponential;
      else throw ConfigError("env '" + text + "': MAB family must be bernoulli, gauss or exp");
      if (spec_.positional().size() != 2) throw ConfigError("env '" + text + "': unexpected positional token");
      means_ = spec_.get_list("means");
      if (!means_.empty() && spec_.has("K") && spec_.get_int("K", 0) != static_cast<std::int64_t>(means_.size())) {
        throw ConfigError("env '" + text + "': K disagrees with the number of means");
      }
      arms_ = means_.empty() ? positive(spec_.get_int("K", 10), "K") : means_.size();
      if (arms_ < 2) throw ConfigError("env '" + text + "': K must be at least 2");
      alpha_ = spec_.get_double("alpha", 1.0);
      if (!(alpha_ > 0.0)) throw ConfigError("env '" + text + "': alpha must be positive");
      sd_ = spec_.get_double("sd", 1.0);
      if (!(sd_ > 0.0)) throw ConfigError("env '" + text + "': sd must be positive");
      if (!means_.empty()) {
        MabEnv probe{means_, family_, sd_, std::nullopt};
        probe.validate();
      }
    } else if (head == "lin") {
      kind_ = Kind::Linear;
      spec_.require_keys({"p", "K"});
      no_extra_positional(text);
      dim_ = positive(spec_.get_int("p", 10), "p");
      arms_ = positive(spec_.get_int("K", 100), "K");
      if (dim_ < 5) throw ConfigError("env '" + text + "': p must be at least 5");
      if (arms_ < dim_) throw ConfigError("env '" + text + "': K must be at least p");
    } else if (head == "cascade" || head == "semi" || head == "mnl") {
      kind_ = head == "cascade" ? Kind::Cascade : head == "semi" ? Kind::Semi : Kind::Mnl;
      no_extra_positional(text);
      if (kind_ == Kind::Cascade) spec_.require_keys({"L", "K", "wmax"});
      if (kind_ == Kind::Semi) spec_.require_keys({"L", "K", "wmax", "sd"});
      if (kind_ == Kind::Mnl) spec_.require_keys({"L", "K", "wmax", "revenue"});
      items_ = positive(spec_.get_int("L", 30), "L");
      arms_ = positive(spec_.get_int("K", 4), "K");
      wmax_ = spec_.get_double("wmax", 0.3);
      if (!(wmax_ > 0.0 && wmax_ <= 1.0)) throw ConfigError("env '" + text + "': wmax must be in (0, 1]");
      sd_ = spec_.get_double("sd", 0.1);
      const std::string rev = spec_.get("revenue", "uniform");
      if (rev != "uniform" && rev != "unit") throw ConfigError("env '" + text + "': revenue must be uniform or unit");
      unit_revenue_ = rev == "unit";
      if (arms_ > items_) throw ConfigError("env '" + text + "': K must not exceed L");
      if (kind_ == Kind::Semi && (arms_ % 2 != 0 || items_ % 2 != 0)) {
        throw ConfigError("env '" + text + "': semi-bandit needs even K and L");
      }
    } else {
      throw ConfigError("unknown environment '" + head + "'");
    }
  }

  [[nodiscard]] const std::string& text() const { return spec_.text(); }
  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] RewardFamily family() const { return family_; }
  [[nodiscard]] double noise_sd() const { return sd_; }
  [[nodiscard]] bool fixed_means() const { return !means_.empty(); }

  [[nodiscard]] Environment instantiate(RngStream& rng) const {
    switch (kind_) {
      case Kind::Mab: {
        if (!means_.empty()) return MabEnv{means_, family_, sd_, std::nullopt};
        return sample_mab_instance(arms_, alpha_, rng, family_, sd_);
      }
      case Kind::Linear: return sample_linear_instance(dim_, arms_, rng);
      case Kind::Cascade: return sample_cascade_instance(items_, arms_, wmax_, rng);
      case Kind::Semi: return sample_semi_instance(items_, arms_, wmax_, sd_, rng);
      case Kind::Mnl: return sample_mnl_instance(items_, arms_, wmax_, unit_revenue_, rng);
    }
    throw ConfigError("unreachable environment kind");
  }

 private:
  static std::size_t positive(std::int64_t v, const char* key) {
    if (v <= 0) throw ConfigError(std::string("environment key '") + key + "' must be positive");
    return static_cast<std::size_t>(v);
  }
  void no_extra_positional(const std::string& text) const {
    if (spec_.positional().size() != 1) throw ConfigError("env '" + text + "': unexpected positional token");
  }

  SpecString spec_;
  Kind kind_ = Kind::Mab;
  RewardFamily family_ = RewardFamily::Bernoulli;
  std::vector<double> means_;
  std::size_t arms_ = 0;
  std::size_t dim_ = 0;
  std::size_t items_ = 0;
  double alpha_ = 1.0;
  double sd_ = 1.0;
  double wmax_ = 0.3;
  bool unit_revenue_ = false;
};

}  // namespace mbe
