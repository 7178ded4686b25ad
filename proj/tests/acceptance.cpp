// Acceptance battery: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Tolerances are fixed here; see the README for what each criterion measures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "mbe/mbe.hpp"

using namespace mbe;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double final_mean(const ExperimentResult& r, std::size_t alg) { return r.aggregate.series[alg].mean.back(); }

double mean_at(const ExperimentResult& r, std::size_t alg, std::size_t t) {
  const auto& s = r.aggregate.series[alg];
  for (std::size_t c = 0; c < s.t.size(); ++c)
    if (s.t[c] == t) return s.mean[c];
  throw ContractViolation("checkpoint " + std::to_string(t) + " not recorded");
}

// 1. Naive bootstrap with Exp(1) weights starves the better arm.
Outcome naive_failure() {
  constexpr double p1 = 0.8, p2 = 0.5;
  constexpr std::size_t runs = 20000, T = 500;
  constexpr double target = 0.5 * (1.0 - p1) * p2;
  auto env = std::make_shared<const Environment>(MabEnv{{p1, p2}, RewardFamily::Bernoulli, 1.0, std::nullopt});
  const AlgorithmSpec alg("naive-mb:dist=exp:B=50");
  std::size_t starved = 0;
  for (std::size_t r = 0; r < runs; ++r) {
    RngStream policy_rng(kSeed, {1, r, 1}), pull_rng(kSeed, {1, r, 2});
    auto policy = alg.make_policy(env);
    std::size_t arm1 = 0;
    for (std::size_t t = 1; t <= T; ++t) {
      const Action a = policy->select(t, policy_rng);
      if (a[0] == 0) ++arm1;
      policy->update(a, pull(*env, a, pull_rng), policy_rng);
    }
    if (arm1 == 1) ++starved;
  }
  const double p = static_cast<double>(starved) / runs;
  const double se = std::sqrt(target * (1.0 - target) / runs);
  return {p >= target - 2.0 * se, "P(arm 1 pulled once) = " + num(p) + ", threshold " + num(target - 2.0 * se) +
                                      " (" + std::to_string(runs) + " runs, T=" + std::to_string(T) + ")"};
}

// 2. Pseudo-rewards fix the failure on the same instance.
Outcome pseudo_rewards_rescue() {
  SimConfig c;
  c.env = "mab:bernoulli:means=0.8,0.5";
  c.algorithms = {"mbe:lambda=0.5:sigma=1:B=50", "naive-mb:dist=exp:B=50"};
  c.T = 4000;
  c.n_runs = 200;
  c.master_seed = kSeed;
  const auto res = run_experiment(c);
  const double mbe = final_mean(res, 0), naive = final_mean(res, 1);
  const double ratio = mbe / mean_at(res, 0, 2000);
  return {mbe < 0.25 * naive && ratio < 1.7, "MBE " + num(mbe) + " vs naive " + num(naive) + " (need < 0.25x), " +
                                                  "regret(4000)/regret(2000) = " + num(ratio) + " (need < 1.7)"};
}

// 3. MBE close to Bernoulli TS on Beta(1,8) instances.
Outcome close_to_ts() {
  SimConfig c;
  c.env = "mab:bernoulli:K=10:alpha=1";
  c.algorithms = {"mbe:lambda=0.5:sigma=1:B=50", "ts:bernoulli:prior=1,1"};
  c.T = 10000;
  c.n_runs = 100;
  c.master_seed = kSeed;
  const auto res = run_experiment(c);
  const double mbe = final_mean(res, 0), ts = final_mean(res, 1);
  return {mbe <= 2.0 * ts, "MBE " + num(mbe) + " vs TS " + num(ts) + ", ratio " + num(mbe / ts) + " (need <= 2)"};
}

// 4. Exact enumeration of the two-arm double-or-nothing example.
Outcome example_enumeration() {
  const auto half = enumerate_example1(0.5);
  const auto zero = enumerate_example1(0.0);
  return {half.probability() >= 1.0 / 64.0 && zero.count == 0,
          "lambda=0.5: " + std::to_string(half.count) + "/64 (need >= 1/64); lambda=0: " + std::to_string(zero.count) +
              "/64 (need 0; " + std::to_string(zero.undefined_wins) +
              " of these are tuples where arm 2 has a zero denominator)"};
}

// 5. The online ensemble tracks full resampling.
Outcome ensemble_matches_exact() {
  SimConfig c;
  c.env = "mab:bernoulli:K=5:alpha=1";
  c.algorithms = {"mbe:lambda=0.5:sigma=1:B=50", "mbe:lambda=0.5:sigma=1:exact=true"};
  c.T = 2000;
  c.n_runs = 200;
  c.master_seed = kSeed;
  const auto res = run_experiment(c);
  const auto& e = res.aggregate.series[0];
  const auto& x = res.aggregate.series[1];
  constexpr double z = 1.96;
  const double e_lo = e.mean.back() - z * e.stderr_.back(), e_hi = e.mean.back() + z * e.stderr_.back();
  const double x_lo = x.mean.back() - z * x.stderr_.back(), x_hi = x.mean.back() + z * x.stderr_.back();
  const bool overlap = e_lo <= x_hi && x_lo <= e_hi;
  // Diagnostic only: a larger ensemble on the same streams, to show the gap closes as B grows.
  c.algorithms = {"mbe:lambda=0.5:sigma=1:B=500"};
  const auto big = run_experiment(c).aggregate.series[0];
  return {overlap, "ensemble B=50 [" + num(e_lo) + ", " + num(e_hi) + "], exact [" + num(x_lo) + ", " + num(x_hi) +
                       "]; diagnostic B=500 mean " + num(big.mean.back()) + " +- " + num(big.stderr_.back())};
}

// 6. Incremental linear updates against an independently accumulated batch solve.
Outcome linear_numerics() {
  constexpr double tol = 1e-8;
  constexpr std::size_t traces = 100;
  double worst = 0.0;
  std::size_t reinversions = 0;
  const auto dist = WeightDistribution::gaussian(1.0);
  for (std::size_t trace = 0; trace < traces; ++trace) {
    RngStream r(kSeed, {6, trace});
    const std::size_t p = 1 + r.below(20);
    const std::size_t T = 1 + r.below(500);
    const double ridge = r.uniform();
    const double lambda = 2.0 * r.uniform();
    const auto mode = r.bernoulli(0.5) ? LbPseudo::Identity : LbPseudo::Feature;
    const auto d = static_cast<Eigen::Index>(p);
    LinearReplicate rep(p, ridge);
    Matrix v = Matrix::Identity(d, d) * (1.0 + ridge);
    Vector b = Vector::Zero(d);
    for (std::size_t t = 0; t < T; ++t) {
      Vector x(d);
      for (auto& xi : x) xi = r.uniform();
      const double reward = r.bernoulli(0.5) ? 1.0 : 0.0;
      const auto w = sample_triplet(dist, r);
      lb_update(rep, x, reward, w, lambda, mode);
      const double pseudo = lambda * w.omega_dprime;
      if (mode == LbPseudo::Identity) {
        v += w.omega * x * x.transpose();
        v.diagonal().array() += pseudo;
      } else {
        v += (w.omega + pseudo) * x * x.transpose();
      }
      b += x * (w.omega * reward + pseudo);
      const Vector ref = v.fullPivLu().solve(b);
      const double err = (rep.theta() - ref).norm() / std::max(ref.norm(), 1e-300);
      worst = std::max(worst, err);
    }
    reinversions += rep.reinversions;
  }
  return {worst <= tol, "worst relative error " + num(worst) + " over " + std::to_string(traces) +
                            " traces (tol 1e-8), re-inversions " + std::to_string(reinversions)};
}

// 7. Numerical checks of the supporting inequalities.
Outcome lemma_suite() {
  const auto x = linspace_grid(0.0, 5.0, 0.5);
  const std::vector<CheckReport> reps = {
      check_gaussian_tail(x),
      check_subgaussian_mgf(100, 1.0, 1'000'000, kSeed),
      check_gaussian_ratio({0.5, 1.0, 2.0, 10.0, 1000.0}, 3.0, 1'000'000, kSeed),
      check_erfc_bound(x),
      check_shifted_mean_clt(0.5, 1.0, 1.0, 1000, 20'000, kSeed),
  };
  bool all = true;
  std::string detail;
  for (const auto& r : reps) {
    all = all && r.pass();
    detail += (detail.empty() ? "" : "; ") + r.check + (r.pass() ? " ok" : " FAILED");
    if (r.check == "shifted_mean_clt") {
      detail += " (observed " + num(r.rows[0].observed) + ", target " +
                num(shifted_mean_target_variance(0.5, 1.0, 1.0)) + " +- 10%; " + r.spec + ")";
    }
  }
  return {all, detail};
}

// 8. Unit weights shift every mean by the same increasing map.
Outcome order_preservation() {
  RngStream r(kSeed, {8});
  std::size_t mismatches = 0, value_errors = 0;
  for (int pair = 0; pair < 1000; ++pair) {
    const double lambda = std::ldexp(r.uniform_pos(), static_cast<int>(r.below(12)) - 4);
    const std::size_t K = 2 + r.below(9);
    // Half the pairs draw means from a coarse grid so that ties occur.
    const bool grid = pair % 2 == 0;
    std::vector<Score> means, scores;
    for (std::size_t k = 0; k < K; ++k) {
      const double m = grid ? static_cast<double>(r.below(9)) / 8.0 : r.uniform();
      const std::vector<double> history = {m};
      const std::vector<WeightTriplet> unit(1);
      const Score s = mbe_mab_score(history, unit, lambda);
      // The score sums 1 + lambda + lambda where the formula has 1 + 2 lambda: a few ulps apart at most.
      const double want = (m + lambda) / (1.0 + 2.0 * lambda);
      if (std::abs(s.value - want) > 4.0 * std::numeric_limits<double>::epsilon() * want) ++value_errors;
      means.push_back(Score::of(m));
      scores.push_back(s);
    }
    if (argmax_set(means) != argmax_set(scores)) ++mismatches;
  }
  return {mismatches == 0 && value_errors == 0, std::to_string(mismatches) + " argmax mismatches, " +
                                                    std::to_string(value_errors) + " score mismatches in 1000 pairs"};
}

// 9. Structured environments: sublinear growth and a win over untuned epsilon-greedy.
Outcome structured_sublinear() {
  bool all = true;
  std::string detail;
  for (const char* env : {"cascade:L=30:K=4", "semi:L=30:K=4", "mnl:L=30:K=4"}) {
    SimConfig c;
    c.env = env;
    c.algorithms = {"mbe:lambda=0.5:sigma=1:B=50", "eg:a=5"};
    c.T = 5000;
    c.n_runs = 100;
    c.master_seed = kSeed;
    const auto res = run_experiment(c);
    const double mbe = final_mean(res, 0), half = mean_at(res, 0, 2500), eg = final_mean(res, 1);
    const bool ok = mbe < 1.8 * half && mbe < eg;
    all = all && ok;
    detail += std::string(detail.empty() ? "" : "; ") + env + ": MBE " + num(mbe) + ", ratio " + num(mbe / half) +
              " (need < 1.8), eg " + num(eg) + (ok ? "" : " FAILED");
  }
  return {all, detail};
}

// 10. Identical config and seed give byte-identical raw CSVs, serial or parallel.
Outcome determinism() {
  const std::vector<std::pair<std::string, std::vector<std::string>>> experiments = {
      {"mab:bernoulli:K=10", {"mbe:B=20", "mbe:exact=true", "naive-mb:dist=exp", "ts:bernoulli", "phe", "eg"}},
      {"mab:gauss:K=5", {"mbe:B=10", "ts:gauss", "phe:a=0.5"}},
      {"lin:p=10:K=100", {"mbe:B=10", "naive-mb:B=10", "ts:gauss", "eg"}},
      {"cascade:L=30:K=4", {"mbe:B=10", "phe", "uniform"}},
      {"semi:L=30:K=4", {"mbe:B=10", "eg"}},
      {"mnl:L=12:K=3", {"mbe:B=10", "phe", "oracle"}},
  };
  std::size_t mismatches = 0;
  for (const auto& [env, algs] : experiments) {
    SimConfig c;
    c.env = env;
    c.algorithms = algs;
    c.T = 400;
    c.n_runs = 6;
    c.master_seed = kSeed;
    std::string reference;
    for (std::size_t threads : {1, 1, 3, 8}) {
      c.threads = threads;
      std::ostringstream out;
      write_raw_csv(out, run_experiment(c));
      if (reference.empty()) reference = out.str();
      else if (out.str() != reference) ++mismatches;
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatching reruns across " +
                               std::to_string(experiments.size()) + " experiments x 4 runs (threads 1, 1, 3, 8)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, naive_failure},      {2, pseudo_rewards_rescue}, {3, close_to_ts},
      {4, example_enumeration}, {5, ensemble_matches_exact}, {6, linear_numerics},
      {7, lemma_suite},        {8, order_preservation},    {9, structured_sublinear},
      {10, determinism},
  };
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
