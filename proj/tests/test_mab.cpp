#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mbe/ensemble.hpp"
#include "mbe/mab.hpp"
#include "mbe/score.hpp"

using namespace mbe;

namespace {
std::vector<WeightTriplet> ones(std::size_t n) { return std::vector<WeightTriplet>(n); }
}  // namespace

TEST(Score, UndefinedRanksBelowEverything) {
  const Score u = Score::undefined();
  EXPECT_TRUE(u < Score::of(-std::numeric_limits<double>::infinity()));
  EXPECT_TRUE(u < Score::of(-1e300));
  EXPECT_FALSE(Score::of(0.0) < u);
  EXPECT_TRUE(u == Score::undefined());
  EXPECT_FALSE(Score::ratio(0.0, 0.0).defined);
  EXPECT_DOUBLE_EQ(Score::ratio(1.0, -2.0).value, -0.5);
}

TEST(SelectArgmax, TieBreakFrequencies) {
  RngStream r(1);
  const std::vector<Score> s = {Score::of(0.1), Score::of(0.9), Score::of(0.9)};
  int second = 0, third = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto a = select_argmax(std::span<const Score>(s), r);
    second += a == 1;
    third += a == 2;
  }
  EXPECT_EQ(second + third, n);
  EXPECT_NEAR(second / double(n), 0.5, 0.015);
  EXPECT_NEAR(third / double(n), 0.5, 0.015);
}

TEST(SelectArgmax, InfiniteScoreWins) {
  RngStream r(2);
  const std::vector<Score> s = {Score::of(1e9), Score::unexplored(), Score::of(3)};
  for (int i = 0; i < 100; ++i) EXPECT_EQ(select_argmax(std::span<const Score>(s), r), 1u);
}

TEST(SelectArgmax, AllUndefinedIsUniform) {
  RngStream r(3);
  const std::vector<Score> s(4, Score::undefined());
  std::vector<int> h(4, 0);
  for (int i = 0; i < 4000; ++i) ++h[select_argmax(std::span<const Score>(s), r)];
  for (int c : h) EXPECT_NEAR(c, 1000, 4 * std::sqrt(1000 * 0.75));
}

TEST(SelectArgmax, InvariantUnderPositiveAffineMaps) {
  RngStream r(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Score> s, t;
    const double a = 0.1 + 5 * r.uniform(), b = r.normal();
    for (int k = 0; k < 6; ++k) {
      const double v = std::floor(r.uniform() * 4);  // forces ties
      s.push_back(Score::of(v));
      t.push_back(Score::of(a * v + b));
    }
    EXPECT_EQ(argmax_set(s), argmax_set(t));
  }
}

TEST(TopK, DescendingWithRandomTies) {
  RngStream r(5);
  const std::vector<Score> s = {Score::of(0.2), Score::of(0.9), Score::of(0.5), Score::of(0.9)};
  int first1 = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto k = top_k(s, 3, r);
    ASSERT_EQ(k.size(), 3u);
    EXPECT_EQ(k[2], 2u);
    EXPECT_TRUE((k[0] == 1 && k[1] == 3) || (k[0] == 3 && k[1] == 1));
    first1 += k[0] == 1;
  }
  EXPECT_NEAR(first1 / 2000.0, 0.5, 0.05);
}

TEST(MbeMabScore, UnitWeightsGiveShiftedMean) {
  const std::vector<double> rewards = {1, 0, 0, 1, 0};  // mean 0.4
  EXPECT_DOUBLE_EQ(mbe_mab_score(rewards, ones(5), 0.5).value, 0.45);
}

TEST(MbeMabScore, HandEvaluatedTriplet) {
  const std::vector<double> rewards = {1.0};
  const std::vector<WeightTriplet> w = {{2.0, 1.0, 1.0}};
  EXPECT_NEAR(mbe_mab_score(rewards, w, 0.5).value, 2.5 / 3.0, 1e-15);
}

TEST(MbeMabScore, NoPseudoRewardsZeroRewardIsZero) {
  const std::vector<double> rewards = {0.0};
  for (double om : {0.3, 1.0, 2.0, 7.5}) {
    const std::vector<WeightTriplet> w = {{om, 2.0, 2.0}};
    const auto s = mbe_mab_score(rewards, w, 0.0);
    EXPECT_TRUE(s.defined);
    EXPECT_EQ(s.value, 0.0);
  }
}

TEST(MbeMabScore, EmptyHistoryIsUnexploredAndZeroDenUndefined) {
  EXPECT_TRUE(mbe_mab_score({}, {}, 0.5).is_infinite());
  const std::vector<double> rewards = {1.0};
  const std::vector<WeightTriplet> w = {{0.0, 0.0, 0.0}};
  EXPECT_FALSE(mbe_mab_score(rewards, w, 0.5).defined);
}

TEST(MbeMabScores, UnpulledArmsAreInfinite) {
  std::vector<ArmHistory> h(3);
  h[1].add(1.0);
  RngStream r(6);
  const auto s = mbe_mab_scores(h, TuningParams{}, r);
  EXPECT_TRUE(s[0].is_infinite());
  EXPECT_FALSE(s[1].is_infinite());
  EXPECT_TRUE(s[2].is_infinite());
}

TEST(NaiveMb, MatchesMbeAtLambdaZeroOnSameWeights) {
  RngStream r(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> rewards, omegas;
    std::vector<WeightTriplet> w;
    for (int l = 0; l < 10; ++l) {
      rewards.push_back(r.uniform());
      const WeightTriplet t{r.exponential(), r.exponential(), r.exponential()};
      w.push_back(t);
      omegas.push_back(t.omega);
    }
    EXPECT_EQ(naive_mb_score(rewards, omegas).value, mbe_mab_score(rewards, w, 0.0).value);
  }
}

TEST(NaiveMb, UnitWeightsGivePlainMeanAndZeroHistoryStaysZero) {
  const std::vector<double> rewards = {1, 0, 1, 1};
  const std::vector<double> w(4, 1.0);
  EXPECT_DOUBLE_EQ(naive_mb_score(rewards, w).value, 0.75);
  std::vector<ArmHistory> h(1);
  h[0].add(0.0);
  RngStream r(8);
  for (int i = 0; i < 100; ++i) {
    const auto s = naive_mb_scores(h, WeightDistribution::exponential(), r);
    EXPECT_EQ(s[0].value, 0.0);
  }
}

TEST(OrderPreservation, UnitWeightsKeepArgmaxOfMeans) {
  RngStream r(9);
  for (int trial = 0; trial < 1000; ++trial) {
    const double lam = 0.01 + 10 * r.uniform();
    const std::size_t K = 2 + r.below(8);
    std::vector<Score> means, shifted;
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t s = 1 + r.below(6);
      std::vector<double> rew(s);
      for (auto& x : rew) x = static_cast<double>(r.below(3)) / 2.0;  // ties are common
      double m = 0;
      for (double x : rew) m += x;
      m /= static_cast<double>(s);
      const auto sc = mbe_mab_score(rew, ones(s), lam);
      EXPECT_NEAR(sc.value, (m + lam) / (1 + 2 * lam), 1e-12);
      means.push_back(Score::of(m));
      shifted.push_back(sc);
    }
    // Compare argmax sets after rounding away sub-ulp noise in the shifted scores.
    std::vector<Score> rounded;
    for (auto s : shifted) rounded.push_back(Score::of(std::round(s.value * 1e9) / 1e9));
    EXPECT_EQ(argmax_set(means), argmax_set(rounded));
  }
}

TEST(Concentration, ScoreNearShiftedMean) {
  // 1e5 Bernoulli(0.3) observations, N(1,1) weights, lambda = 0.5.
  const double mu = 0.3, lam = 0.5, sigma2 = mu * (1 - mu);
  const std::size_t s = 100000;
  RngStream r(10);
  std::vector<ArmHistory> h(1);
  for (std::size_t i = 0; i < s; ++i) h[0].add(r.bernoulli(mu) ? 1.0 : 0.0);
  const double sd = std::sqrt((sigma2 + 2.0) / ((1 + 2 * lam) * (1 + 2 * lam) * double(s)));
  for (int rep = 0; rep < 5; ++rep) {
    const auto sc = mbe_mab_scores(h, TuningParams{lam, WeightDistribution::gaussian(1.0)}, r);
    EXPECT_NEAR(sc[0].value, (mu + lam) / (1 + 2 * lam), 5 * sd);
  }
}

TEST(Ensemble, SingleReplicateUnitWeightsIsShiftedMean) {
  EnsembleState st(1, 2, TuningParams{0.5, WeightDistribution::gaussian(1.0)});
  const std::vector<WeightTriplet> w(1);
  for (double x : {1.0, 0.0, 1.0, 1.0}) st.update(0, x, w);
  const auto s = st.scores(0);
  EXPECT_DOUBLE_EQ(s[0].value, (0.75 + 0.5) / 2.0);
  EXPECT_TRUE(s[1].is_infinite());
}

TEST(Ensemble, AccumulatorsMatchHandSums) {
  EnsembleState st(2, 1, TuningParams{0.5, WeightDistribution::gaussian(1.0)});
  const std::vector<std::vector<WeightTriplet>> w = {
      {{2.0, 1.0, 0.5}, {1.0, 1.0, 1.0}},
      {{0.5, 0.0, 2.0}, {3.0, 0.5, 0.5}},
      {{1.5, 2.0, 1.0}, {0.0, 0.0, 2.0}},
  };
  const double r[] = {1.0, 0.0, 1.0};
  for (int i = 0; i < 3; ++i) st.update(0, r[i], w[i]);
  // Replicate 0: num = (2 + .5) + (0 + 0) + (1.5 + 1) = 5; den = 2.75 + 1.5 + 3 = 7.25
  EXPECT_DOUBLE_EQ(st.num(0, 0), 5.0);
  EXPECT_DOUBLE_EQ(st.den(0, 0), 7.25);
  // Replicate 1: num = (1 + .5) + (0 + .25) + (0 + 0) = 1.75; den = 2 + 3.5 + 1 = 6.5
  EXPECT_DOUBLE_EQ(st.num(1, 0), 1.75);
  EXPECT_DOUBLE_EQ(st.den(1, 0), 6.5);
  EXPECT_EQ(st.count(0), 3u);
}

TEST(Ensemble, ReplayIsBitIdentical) {
  auto run = [] {
    EnsembleState st(8, 3, TuningParams{});
    RngStream r(11);
    for (int t = 0; t < 100; ++t) st.update(r.below(3), r.uniform(), r);
    return st;
  };
  const auto a = run(), b = run();
  for (std::size_t rep = 0; rep < 8; ++rep)
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_EQ(a.num(rep, k), b.num(rep, k));
      EXPECT_EQ(a.den(rep, k), b.den(rep, k));
    }
}

TEST(Ensemble, ReplicateChoiceIsUniform) {
  EnsembleState st(5, 2, TuningParams{});
  RngStream r(12);
  std::vector<int> h(5, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++h[st.sample_replicate(r)];
  for (int c : h) EXPECT_NEAR(c / double(n), 0.2, 3 * std::sqrt(0.2 * 0.8 / n));
}

TEST(Ensemble, DominantArmAlwaysChosen) {
  EnsembleState st(4, 3, TuningParams{0.5, WeightDistribution::gaussian(1.0)});
  const std::vector<WeightTriplet> w(4);
  st.update(0, 0.0, w);
  st.update(1, 10.0, w);
  st.update(2, 0.0, w);
  RngStream r(13);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(st.select(r), 1u);
}

TEST(Ensemble, NaiveModeIgnoresLambda) {
  EnsembleState st(1, 1, TuningParams{0.5, WeightDistribution::gaussian(1.0)}, false);
  const std::vector<WeightTriplet> w = {{2.0, 5.0, 5.0}};
  st.update(0, 0.25, w);
  EXPECT_DOUBLE_EQ(st.num(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(st.den(0, 0), 2.0);
}
