#pragma once

// Policies and the algorithm spec grammar.
//
// Most policies are an ItemScorer (one randomized score per arm or item)
// plus the environment-specific rule that turns scores into an action. The
// linear-bandit MBE has its own policy because it scores arms through a
// shared parameter vector.

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mbe/baselines.hpp"
#include "mbe/ensemble.hpp"
#include "mbe/envs.hpp"
#include "mbe/linear.hpp"
#include "mbe/mab.hpp"
#include "mbe/spec_string.hpp"
#include "mbe/structured.hpp"
#include "mbe/weights.hpp"

namespace mbe {

class Policy {
 public:
  virtual ~Policy() = default;
  /// `t` is the 1-based round index.
  virtual Action select(std::size_t t, RngStream& rng) = 0;
  virtual void update(const Action& action, const Feedback& fb, RngStream& rng) = 0;
};

class ItemScorer {
 public:
  virtual ~ItemScorer() = default;
  virtual std::vector<Score> scores(RngStream& rng) = 0;
  virtual void observe(std::size_t item, double value, RngStream& rng) = 0;
  /// Maps a score back to the reward scale. MBE scores are the affine shift
  /// (x + lambda) / (1 + 2 lambda) of a mean, so the inverse undoes it.
  [[nodiscard]] virtual double natural(double score) const { return score; }
};

class EnsembleScorer final : public ItemScorer {
 public:
  explicit EnsembleScorer(EnsembleState state) : state_(std::move(state)) {}
  std::vector<Score> scores(RngStream& rng) override { return state_.sample_scores(rng); }
  void observe(std::size_t item, double value, RngStream& rng) override { state_.update(item, value, rng); }
  [[nodiscard]] double natural(double s) const override {
    const double lam = state_.lambda();
    return (1.0 + 2.0 * lam) * s - lam;
  }
  [[nodiscard]] const EnsembleState& state() const { return state_; }

 private:
  EnsembleState state_;
};

/// Full-resample scores; O(history) work per call.
class ExactScorer final : public ItemScorer {
 public:
  ExactScorer(std::size_t items, TuningParams params, bool pseudo_rewards)
      : histories_(items), params_(params), pseudo_(pseudo_rewards) {}
  std::vector<Score> scores(RngStream& rng) override {
    return pseudo_ ? mbe_mab_scores(histories_, params_, rng) : naive_mb_scores(histories_, params_.dist, rng);
  }
  void observe(std::size_t item, double value, RngStream&) override { histories_.at(item).add(value); }
  [[nodiscard]] double natural(double s) const override {
    const double lam = pseudo_ ? params_.lambda : 0.0;
    return (1.0 + 2.0 * lam) * s - lam;
  }

 private:
  std::vector<ArmHistory> histories_;
  TuningParams params_;
  bool pseudo_;
};

/// Empirical means; unseen items score +inf.
class MeanScorer final : public ItemScorer {
 public:
  explicit MeanScorer(std::size_t items) : sum_(items, 0.0), count_(items, 0) {}
  std::vector<Score> scores(RngStream&) override {
    std::vector<Score> s(sum_.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      s[i] = count_[i] == 0 ? Score::unexplored() : Score::of(sum_[i] / static_cast<double>(count_[i]));
    return s;
  }
  void observe(std::size_t item, double value, RngStream&) override {
    sum_.at(item) += value;
    ++count_[item];
  }

 private:
  std::vector<double> sum_;
  std::vector<std::size_t> count_;
};

class PheScorer final : public ItemScorer {
 public:
  explicit PheScorer(PheState state) : state_(std::move(state)) {}
  std::vector<Score> scores(RngStream& rng) override { return state_.sample(rng); }
  void observe(std::size_t item, double value, RngStream&) override { state_.update(item, value); }

 private:
  PheState state_;
};

class BetaTsScorer final : public ItemScorer {
 public:
  explicit BetaTsScorer(BetaPosterior post) : post_(std::move(post)) {}
  std::vector<Score> scores(RngStream& rng) override { return post_.sample(rng); }
  void observe(std::size_t item, double value, RngStream&) override { post_.update(item, value); }

 private:
  BetaPosterior post_;
};

class GaussTsScorer final : public ItemScorer {
 public:
  explicit GaussTsScorer(GaussianPosterior post) : post_(std::move(post)) {}
  std::vector<Score> scores(RngStream& rng) override { return post_.sample(rng); }
  void observe(std::size_t item, double value, RngStream&) override { post_.update(item, value); }

 private:
  GaussianPosterior post_;
};

/// Scores -> action for any environment, optionally with epsilon-greedy
/// exploration, with MNL epochs handled internally.
class ScoredPolicy final : public Policy {
 public:
  ScoredPolicy(std::shared_ptr<const Environment> env, std::unique_ptr<ItemScorer> scorer,
               std::optional<EGSchedule> eg = std::nullopt)
      : env_(std::move(env)), scorer_(std::move(scorer)), eg_(eg) {}

  Action select(std::size_t t, RngStream& rng) override {
    const bool mnl = std::holds_alternative<MnlEnv>(*env_);
    if (mnl && epoch_.active()) return epoch_.offered();
    Action a;
    if (eg_ && rng.uniform() < eg_->epsilon(t)) {
      a = random_action(*env_, rng);
    } else {
      a = from_scores(rng);
    }
    if (mnl) epoch_.start(a);
    return a;
  }

  void update(const Action& action, const Feedback& fb, RngStream& rng) override {
    if (std::holds_alternative<MnlEnv>(*env_)) {
      for (const auto& [item, value] : epoch_.record(fb)) scorer_->observe(item, value, rng);
      return;
    }
    for (const auto& [item, value] : item_observations(*env_, action, fb)) scorer_->observe(item, value, rng);
  }

  [[nodiscard]] const ItemScorer& scorer() const { return *scorer_; }

 private:
  Action from_scores(RngStream& rng) {
    auto s = scorer_->scores(rng);
    return std::visit(
        [&](const auto& e) -> Action {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, MabEnv> || std::is_same_v<T, LinEnv>) {
            return {select_argmax(std::span<const Score>(s), rng)};
          } else if constexpr (std::is_same_v<T, CascadeEnv>) {
            return assemble_cascade(s, e.slate_size, rng);
          } else if constexpr (std::is_same_v<T, SemiBanditEnv>) {
            return assemble_semi(s, e, rng);
          } else {
            for (auto& x : s)
              if (x.defined && !x.is_infinite()) x.value = scorer_->natural(x.value);
            return assemble_mnl(s, e.revenues, e.slate_size, rng);
          }
        },
        *env_);
  }

  std::shared_ptr<const Environment> env_;
  std::unique_ptr<ItemScorer> scorer_;
  std::optional<EGSchedule> eg_;
  MnlEpoch epoch_;
};

/// MBE (or the naive variant) for fixed-arm linear bandits. The first p rounds
/// pull arms 0..p-1 in order.
class LinearMbePolicy final : public Policy {
 public:
  LinearMbePolicy(std::shared_ptr<const Environment> env, LinearEnsemble ensemble)
      : env_(std::move(env)), ensemble_(std::move(ensemble)) {}

  Action select(std::size_t t, RngStream& rng) override {
    const auto& e = std::get<LinEnv>(*env_);
    if (t <= e.dim()) return {t - 1};
    return {ensemble_.select(e.features, rng)};
  }

  void update(const Action& action, const Feedback& fb, RngStream& rng) override {
    const auto& e = std::get<LinEnv>(*env_);
    const Vector x = e.features.row(static_cast<Eigen::Index>(action.at(0))).transpose();
    ensemble_.update(x, fb.reward, rng);
  }

  [[nodiscard]] const LinearEnsemble& ensemble() const { return ensemble_; }

 private:
  std::shared_ptr<const Environment> env_;
  LinearEnsemble ensemble_;
};

/// Always plays an optimal action. Used for sanity checks.
class OraclePolicy final : public Policy {
 public:
  explicit OraclePolicy(std::shared_ptr<const Environment> env) : env_(std::move(env)) {
    best_ = std::visit(
        [&](const auto& e) -> Action {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, MabEnv>) {
            return {static_cast<std::size_t>(std::max_element(e.means.begin(), e.means.end()) - e.means.begin())};
          } else if constexpr (std::is_same_v<T, LinEnv>) {
            Eigen::Index k;
            (e.features * e.theta).maxCoeff(&k);
            return {static_cast<std::size_t>(k)};
          } else if constexpr (std::is_same_v<T, CascadeEnv>) {
            std::vector<Score> s;
            for (double w : e.attractions) s.push_back(Score::of(w));
            RngStream r(0);
            return top_k(s, e.slate_size, r);
          } else if constexpr (std::is_same_v<T, SemiBanditEnv>) {
            std::vector<Score> s;
            for (double m : e.item_means) s.push_back(Score::of(m));
            RngStream r(0);
            return assemble_semi(s, e, r);
          } else {
            return mnl_best_assortment(e.attractiveness, e.revenues, e.slate_size).items;
          }
        },
        *env_);
  }
  Action select(std::size_t, RngStream&) override { return best_; }
  void update(const Action&, const Feedback&, RngStream&) override {}

 private:
  std::shared_ptr<const Environment> env_;
  Action best_;
};

class UniformPolicy final : public Policy {
 public:
  explicit UniformPolicy(std::shared_ptr<const Environment> env) : env_(std::move(env)) {}
  Action select(std::size_t, RngStream& rng) override { return random_action(*env_, rng); }
  void update(const Action&, const Feedback&, RngStream&) override {}

 private:
  std::shared_ptr<const Environment> env_;
};

// ---------------------------------------------------------------------------
// Algorithm specs

/// Parsed algorithm spec, e.g. `mbe:lambda=0.5:sigma=1:B=50:exact=false`.
class AlgorithmSpec {
 public:
  enum class Kind { Mbe, NaiveMb, Ts, Phe, Eg, Oracle, Uniform };

  explicit AlgorithmSpec(const std::string& text) : spec_(text) {
    const std::string head = spec_.positional(0);
    if (head == "mbe" || head == "naive-mb") {
      kind_ = head == "mbe" ? Kind::Mbe : Kind::NaiveMb;
      spec_.require_keys({"lambda", "sigma", "dist", "B", "exact", "xi", "lb_pseudo"});
      no_extra_positional();
      if (kind_ == Kind::NaiveMb && spec_.has("lambda")) throw ConfigError("naive-mb takes no lambda");
      lambda_ = kind_ == Kind::Mbe ? spec_.get_double("lambda", 0.5) : 0.0;
      if (!(lambda_ >= 0.0)) throw ConfigError("alg '" + text + "': lambda must be nonnegative");
      if (spec_.has("dist") && spec_.has("sigma")) throw ConfigError("alg '" + text + "': give either dist or sigma");
      if (spec_.has("dist")) {
        dist_ = WeightDistribution::parse(spec_.get("dist", ""));
      } else {
        dist_ = WeightDistribution::gaussian(spec_.get_double("sigma", 1.0));
      }
      const auto b = spec_.get_int("B", 50);
      if (b < 1) throw ConfigError("alg '" + text + "': B must be at least 1");
      replicates_ = static_cast<std::size_t>(b);
      exact_ = spec_.get_bool("exact", false);
      xi_ = spec_.get_double("xi", 0.0);
      if (!(xi_ >= 0.0)) throw ConfigError("alg '" + text + "': xi must be nonnegative");
      lb_pseudo_ = parse_lb_pseudo(spec_.get("lb_pseudo", "identity"));
    } else if (head == "ts") {
      kind_ = Kind::Ts;
      spec_.require_keys({"prior", "sd", "calibrated"});
      const std::string fam = spec_.positional(1);
      if (fam != "bernoulli" && fam != "gauss") throw ConfigError("alg '" + text + "': ts family must be bernoulli or gauss");
      if (spec_.positional().size() != 2) throw ConfigError("alg '" + text + "': unexpected positional token");
      ts_gauss_ = fam == "gauss";
      auto prior = spec_.get_list("prior");
      if (prior.empty()) prior = ts_gauss_ ? std::vector<double>{0.5, 0.5} : std::vector<double>{1.0, 1.0};
      if (prior.size() != 2 || !(prior[1] > 0.0) || (!ts_gauss_ && !(prior[0] > 0.0))) {
        throw ConfigError("alg '" + text + "': prior needs two values (positive where required)");
      }
      prior_ = {prior[0], prior[1]};
      ts_sd_ = spec_.get_double("sd", 1.0);
      if (!(ts_sd_ > 0.0)) throw ConfigError("alg '" + text + "': sd must be positive");
      calibrated_ = spec_.get_bool("calibrated", false);
      if (!ts_gauss_ && spec_.has("sd")) throw ConfigError("alg '" + text + "': sd applies to ts:gauss only");
    } else if (head == "phe" || head == "eg") {
      kind_ = head == "phe" ? Kind::Phe : Kind::Eg;
      spec_.require_keys({"a"});
      no_extra_positional();
      a_ = spec_.get_double("a", 1.0);
      if (!(a_ > 0.0)) throw ConfigError("alg '" + text + "': a must be positive");
    } else if (head == "oracle" || head == "uniform") {
      kind_ = head == "oracle" ? Kind::Oracle : Kind::Uniform;
      spec_.require_keys({});
      no_extra_positional();
    } else {
      throw ConfigError("unknown algorithm '" + head + "'");
    }
  }

  [[nodiscard]] const std::string& text() const { return spec_.text(); }
  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double lambda() const { return lambda_; }
  [[nodiscard]] const WeightDistribution& dist() const { return dist_; }
  [[nodiscard]] std::size_t replicates() const { return replicates_; }
  [[nodiscard]] bool exact() const { return exact_; }
  [[nodiscard]] double a() const { return a_; }
  [[nodiscard]] bool calibrated() const { return calibrated_; }

  /// Name of the key the hyperparameter sweep varies, if any.
  [[nodiscard]] std::optional<std::string> tuning_key() const {
    switch (kind_) {
      case Kind::Mbe: return "lambda";
      case Kind::NaiveMb:
        if (dist_.kind() == WeightDistribution::Kind::GaussianUnitMean) return "sigma";
        return std::nullopt;
      case Kind::Phe:
      case Kind::Eg: return "a";
      default: return std::nullopt;
    }
  }

  /// The spec text with the tuning key set to `value`.
  [[nodiscard]] std::string with_tuning(double value) const {
    const auto key = tuning_key();
    if (!key) throw ConfigError("algorithm '" + text() + "' has no tunable parameter");
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, value);
    std::string v(buf, r.ptr);
    if (*key == "sigma" && spec_.has("dist")) {
      SpecString stripped(spec_.with("dist", "gauss:" + v));
      return stripped.text();
    }
    return spec_.with(*key, v);
  }

  /// Config-time compatibility check against an environment spec.
  void check_compatible(const EnvSpec& env) const {
    using EK = EnvSpec::Kind;
    const bool mab_like = env.kind() == EK::Mab || env.kind() == EK::Linear;
    if (kind_ == Kind::Ts) {
      if (!mab_like) throw ConfigError("'" + text() + "' supports MAB and linear environments only");
      if (!ts_gauss_ && env.kind() == EK::Mab && env.family() != RewardFamily::Bernoulli) {
        throw ConfigError("'" + text() + "' needs binary rewards; env '" + env.text() + "' is not Bernoulli");
      }
      if (calibrated_ && (env.kind() != EK::Mab || env.fixed_means())) {
        throw ConfigError("'" + text() + "': calibrated priors need a sampled MAB instance");
      }
    }
    if ((kind_ == Kind::Mbe || kind_ == Kind::NaiveMb) && env.kind() == EK::Linear && exact_) {
      throw ConfigError("'" + text() + "': the linear specialization is ensemble-only (exact=false)");
    }
  }

  [[nodiscard]] std::unique_ptr<Policy> make_policy(std::shared_ptr<const Environment> env) const {
    const Environment& e = *env;
    const std::size_t n = num_items(e);
    const bool pseudo = kind_ == Kind::Mbe;
    const TuningParams params{lambda_, dist_};
    switch (kind_) {
      case Kind::Mbe:
      case Kind::NaiveMb: {
        if (const auto* lin = std::get_if<LinEnv>(&e)) {
          if (exact_) throw ConfigError("'" + text() + "': the linear specialization is ensemble-only");
          return std::make_unique<LinearMbePolicy>(
              env, LinearEnsemble(replicates_, lin->dim(), params, xi_, lb_pseudo_, pseudo));
        }
        std::unique_ptr<ItemScorer> scorer;
        if (exact_) scorer = std::make_unique<ExactScorer>(n, params, pseudo);
        else scorer = std::make_unique<EnsembleScorer>(EnsembleState(replicates_, n, params, pseudo));
        return std::make_unique<ScoredPolicy>(env, std::move(scorer));
      }
      case Kind::Ts: {
        auto [p0, p1] = prior_;
        if (calibrated_) {
          const auto* mab = std::get_if<MabEnv>(&e);
          if (!mab || !mab->generator) throw ConfigError("'" + text() + "': calibrated priors need a sampled MAB instance");
          const auto [ga, gb] = *mab->generator;
          if (ts_gauss_) {
            p0 = ga / (ga + gb);
            p1 = std::sqrt(ga * gb / ((ga + gb) * (ga + gb) * (ga + gb + 1.0)));
          } else {
            p0 = ga;
            p1 = gb;
          }
        }
        if (ts_gauss_) return std::make_unique<ScoredPolicy>(env, std::make_unique<GaussTsScorer>(GaussianPosterior(n, p0, p1, ts_sd_)));
        return std::make_unique<ScoredPolicy>(env, std::make_unique<BetaTsScorer>(BetaPosterior(n, p0, p1)));
      }
      case Kind::Phe: {
        PheNoise noise = PheNoise::Bernoulli;
        double sd = 1.0;
        if (const auto* mab = std::get_if<MabEnv>(&e)) {
          noise = mab->family == RewardFamily::Gaussian      ? PheNoise::Gaussian
                  : mab->family == RewardFamily::Exponential ? PheNoise::Exponential
                                                             : PheNoise::Bernoulli;
          sd = mab->noise_sd;
        } else if (const auto* semi = std::get_if<SemiBanditEnv>(&e)) {
          noise = PheNoise::Gaussian;
          sd = semi->noise_sd;
        } else if (std::holds_alternative<MnlEnv>(e)) {
          noise = PheNoise::Poisson;
        }
        return std::make_unique<ScoredPolicy>(env, std::make_unique<PheScorer>(PheState(n, a_, noise, sd)));
      }
      case Kind::Eg:
        return std::make_unique<ScoredPolicy>(env, std::make_unique<MeanScorer>(n), EGSchedule{a_});
      case Kind::Oracle: return std::make_unique<OraclePolicy>(env);
      case Kind::Uniform: return std::make_unique<UniformPolicy>(env);
    }
    throw ConfigError("unreachable algorithm kind");
  }

 private:
  void no_extra_positional() const {
    if (spec_.positional().size() != 1) throw ConfigError("alg '" + spec_.text() + "': unexpected positional token");
  }

  SpecString spec_;
  Kind kind_ = Kind::Mbe;
  double lambda_ = 0.0;
  WeightDistribution dist_ = WeightDistribution::gaussian(1.0);
  std::size_t replicates_ = 50;
  bool exact_ = false;
  double xi_ = 0.0;
  LbPseudo lb_pseudo_ = LbPseudo::Identity;
  bool ts_gauss_ = false;
  std::pair<double, double> prior_{1.0, 1.0};
  double ts_sd_ = 1.0;
  bool calibrated_ = false;
  double a_ = 1.0;
};

}  // namespace mbe
