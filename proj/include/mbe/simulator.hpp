#pragma once

// Experiment runner: episodes, regret accounting, replication across runs,
// aggregation at checkpoints and hyperparameter sweeps.
//
// Seeding. Run r of an experiment uses three streams rooted at
// (master_seed, env_hash, r): sub-path 0 draws the environment instance
// (shared by every algorithm in that run), sub-path (1, alg_hash) drives the
// policy and (2, alg_hash) draws rewards. Results therefore depend only on
// the config, never on thread scheduling or on which other algorithms run.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mbe/envs.hpp"
#include "mbe/errors.hpp"
#include "mbe/policy.hpp"
#include "mbe/rng.hpp"
#include "mbe/weights.hpp"

namespace mbe {

struct RegretCurve {
  std::vector<double> cumulative;  ///< cumulative[t-1] is the regret after round t
};

enum class RegretAccounting {
  Expected,  ///< optimal value minus the expected value of the chosen action
  Realized,  ///< optimal value minus the observed reward
};

/// Plays `T` rounds of select -> pull -> update. `policy_rng` feeds the
/// policy, `env_rng` the reward draws.
inline RegretCurve run_episode(const Environment& env, Policy& policy, std::size_t T, RngStream& policy_rng,
                               RngStream& env_rng, RegretAccounting accounting = RegretAccounting::Expected) {
  if (T == 0) throw ConfigError("T must be at least 1");
  const double best = optimal_value(env);
  RegretCurve curve;
  curve.cumulative.reserve(T);
  double total = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    const Action a = policy.select(t, policy_rng);
    const Feedback fb = pull(env, a, env_rng);
    const double gained = accounting == RegretAccounting::Expected ? expected_value(env, a) : fb.reward;
    // Clamp rounding noise so expected-value curves stay nondecreasing.
    double step = best - gained;
    if (accounting == RegretAccounting::Expected && step < 0.0) step = 0.0;
    total += step;
    curve.cumulative.push_back(total);
    policy.update(a, fb, policy_rng);
  }
  return curve;
}

struct SimConfig {
  std::string experiment_id = "exp";
  std::string env;
  std::vector<std::string> algorithms;
  std::size_t T = 1000;
  std::size_t n_runs = 10;
  std::uint64_t master_seed = 0;
  std::size_t checkpoint_stride = 0;  ///< 0 means max(1, T/200)
  std::size_t threads = 0;            ///< 0 means hardware concurrency
  RegretAccounting accounting = RegretAccounting::Expected;
  std::string raw_csv;
  std::string aggregate_csv;
  std::string svg;

  [[nodiscard]] std::size_t stride() const {
    return checkpoint_stride ? checkpoint_stride : std::max<std::size_t>(1, T / 200);
  }

  /// Rounds at which curves are recorded: multiples of the stride, plus T.
  [[nodiscard]] std::vector<std::size_t> checkpoints() const {
    std::vector<std::size_t> out;
    for (std::size_t t = stride(); t <= T; t += stride()) out.push_back(t);
    if (out.empty() || out.back() != T) out.push_back(T);
    return out;
  }

  /// Parses every spec and checks each pairing. Throws ConfigError.
  void validate() const {
    if (T < 1) throw ConfigError("T must be at least 1");
    if (n_runs < 1) throw ConfigError("runs must be at least 1");
    if (env.empty()) throw ConfigError("no environment");
    if (algorithms.empty()) throw ConfigError("no algorithms");
    const EnvSpec e(env);
    std::vector<std::string> seen;
    for (const auto& a : algorithms) {
      AlgorithmSpec(a).check_compatible(e);
      if (std::find(seen.begin(), seen.end(), a) != seen.end()) throw ConfigError("duplicate algorithm '" + a + "'");
      seen.push_back(a);
    }
  }
};

struct SeriesStats {
  std::string algorithm;
  std::vector<std::size_t> t;
  std::vector<double> mean;
  std::vector<double> stderr_;
  std::size_t n_runs = 0;
};

struct AggregatedResult {
  std::string experiment_id;
  std::vector<SeriesStats> series;
};

struct ExperimentResult {
  std::string experiment_id;
  std::vector<std::string> algorithms;
  std::vector<std::size_t> checkpoints;
  /// raw[a][r][c]: cumulative regret of algorithm a, run r, at checkpoints[c].
  std::vector<std::vector<std::vector<double>>> raw;
  AggregatedResult aggregate;
  std::vector<std::string> notices;
};

/// Mean and stderr = sample sd / sqrt(n) per checkpoint. n = 1 gives stderr 0.
inline SeriesStats aggregate_runs(const std::string& algorithm, const std::vector<std::size_t>& checkpoints,
                                  const std::vector<std::vector<double>>& runs) {
  SeriesStats s;
  s.algorithm = algorithm;
  s.t = checkpoints;
  s.n_runs = runs.size();
  const double n = static_cast<double>(runs.size());
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    double sum = 0.0;
    for (const auto& r : runs) sum += r.at(c);
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& r : runs) ss += (r[c] - mean) * (r[c] - mean);
    s.mean.push_back(mean);
    s.stderr_.push_back(runs.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0);
  }
  return s;
}

/// Human-readable notes about configured tunings (never blocking).
inline std::vector<std::string> tuning_notices(const std::vector<std::string>& algorithms) {
  std::vector<std::string> out;
  for (const auto& text : algorithms) {
    const AlgorithmSpec a(text);
    if (a.kind() == AlgorithmSpec::Kind::Ts && a.calibrated()) {
      out.push_back(text + ": oracle-informed prior (generator mean and variance of the true instance)");
    }
    if (a.kind() != AlgorithmSpec::Kind::Mbe) continue;
    const double sigma = a.dist().sd();
    const auto status = validate_tuning(a.lambda(), sigma);
    out.push_back(text + ": tuning " + to_string(status) + " (lambda " + std::to_string(a.lambda()) +
                  ", theory needs >= " + std::to_string(tuning_threshold(sigma)) + ")");
  }
  return out;
}

/// Runs `count` jobs on up to `threads` workers; rethrows the first failure.
template <class Job>
void parallel_for(std::size_t count, std::size_t threads, Job&& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) return;
          try {
            job(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(count);
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

inline ExperimentResult run_experiment(const SimConfig& config) {
  config.validate();
  const EnvSpec env_spec(config.env);
  std::vector<AlgorithmSpec> algs;
  for (const auto& a : config.algorithms) algs.emplace_back(a);

  ExperimentResult res;
  res.experiment_id = config.experiment_id;
  res.algorithms = config.algorithms;
  res.checkpoints = config.checkpoints();
  res.notices = tuning_notices(config.algorithms);
  res.raw.assign(algs.size(), std::vector<std::vector<double>>(config.n_runs));

  const std::uint64_t env_hash = hash_label(config.env);
  const std::size_t jobs = algs.size() * config.n_runs;
  parallel_for(jobs, config.threads, [&](std::size_t job) {
    const std::size_t a = job / config.n_runs;
    const std::size_t r = job % config.n_runs;
    const std::uint64_t alg_hash = hash_label(config.algorithms[a]);
    RngStream instance_rng(config.master_seed, {env_hash, r, 0});
    auto env = std::make_shared<const Environment>(env_spec.instantiate(instance_rng));
    RngStream policy_rng(config.master_seed, {env_hash, r, 1, alg_hash});
    RngStream pull_rng(config.master_seed, {env_hash, r, 2, alg_hash});
    auto policy = algs[a].make_policy(env);
    const auto curve = run_episode(*env, *policy, config.T, policy_rng, pull_rng, config.accounting);
    auto& out = res.raw[a][r];
    out.reserve(res.checkpoints.size());
    for (auto t : res.checkpoints) out.push_back(curve.cumulative[t - 1]);
  });

  res.aggregate.experiment_id = config.experiment_id;
  for (std::size_t a = 0; a < algs.size(); ++a)
    res.aggregate.series.push_back(aggregate_runs(config.algorithms[a], res.checkpoints, res.raw[a]));
  return res;
}

/// {2^(k-4) : k = 0..6}.
inline std::vector<double> default_sweep_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 6; ++k) g.push_back(std::ldexp(1.0, k - 4));
  return g;
}

struct SweepPoint {
  double parameter = 0.0;
  std::string algorithm;  ///< the concrete spec run at this point
  double final_mean = 0.0;
  double final_stderr = 0.0;
};

struct SweepEntry {
  std::string base;                   ///< spec as configured
  std::optional<std::string> key;     ///< tuned key, empty for untunable algorithms
  std::vector<SweepPoint> points;     ///< one per grid value (or one for untunable)
  std::size_t best = 0;               ///< index into points
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  ExperimentResult experiment;  ///< every concrete spec that was run
};

/// Index of the smallest final mean; ties go to the smaller parameter.
inline std::size_t sweep_argmin(const std::vector<SweepPoint>& pts) {
  if (pts.empty()) throw ConfigError("sweep grid is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const auto& p = pts[i];
    const auto& b = pts[best];
    if (p.final_mean < b.final_mean || (p.final_mean == b.final_mean && p.parameter < b.parameter)) best = i;
  }
  return best;
}

/// Runs every tunable algorithm at each grid value in one experiment and
/// reports the best value per algorithm by final-round mean regret.
inline SweepResult sweep(const SimConfig& config, const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  config.validate();
  SweepResult out;
  SimConfig expanded = config;
  expanded.algorithms.clear();
  std::vector<std::vector<std::size_t>> index;  // entry -> positions in expanded.algorithms
  auto position = [&](const std::string& spec) {
    auto it = std::find(expanded.algorithms.begin(), expanded.algorithms.end(), spec);
    if (it != expanded.algorithms.end()) return static_cast<std::size_t>(it - expanded.algorithms.begin());
    expanded.algorithms.push_back(spec);
    return expanded.algorithms.size() - 1;
  };
  for (const auto& text : config.algorithms) {
    const AlgorithmSpec a(text);
    SweepEntry e;
    e.base = text;
    e.key = a.tuning_key();
    std::vector<std::size_t> pos;
    if (e.key) {
      for (double g : grid) {
        if (!(g > 0.0) && *e.key != "lambda") throw ConfigError("sweep value for '" + *e.key + "' must be positive");
        if (!(g >= 0.0)) throw ConfigError("sweep value must be nonnegative");
        const std::string spec = a.with_tuning(g);
        e.points.push_back({g, spec, 0.0, 0.0});
        pos.push_back(position(spec));
      }
    } else {
      e.points.push_back({std::numeric_limits<double>::quiet_NaN(), text, 0.0, 0.0});
      pos.push_back(position(text));
    }
    out.entries.push_back(std::move(e));
    index.push_back(std::move(pos));
  }
  out.experiment = run_experiment(expanded);
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    auto& e = out.entries[i];
    for (std::size_t j = 0; j < e.points.size(); ++j) {
      const auto& s = out.experiment.aggregate.series[index[i][j]];
      e.points[j].final_mean = s.mean.back();
      e.points[j].final_stderr = s.stderr_.back();
    }
    e.best = sweep_argmin(e.points);
  }
  return out;
}

}  // namespace mbe
