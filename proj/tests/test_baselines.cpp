#include <gtest/gtest.h>

#include <cmath>

#include "mbe/baselines.hpp"

using namespace mbe;

TEST(BetaPosterior, UpdateCounts) {
  BetaPosterior p(1);
  p.update(0, 1.0);
  p.update(0, 1.0);
  p.update(0, 0.0);
  EXPECT_EQ(p.alpha[0], 3.0);
  EXPECT_EQ(p.beta[0], 2.0);
  EXPECT_DOUBLE_EQ(p.mean(0), 0.6);
}

TEST(BetaPosterior, RejectsNonBinaryReward) {
  BetaPosterior p(2);
  EXPECT_THROW(p.update(0, 0.5), ContractViolation);
  EXPECT_THROW(BetaPosterior(2, 0.0, 1.0), ConfigError);
}

TEST(BetaPosterior, ConcentratedArmIsChosen) {
  BetaPosterior p(2);
  p.alpha[1] = 1e6;
  RngStream r(1);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(select_argmax(p.sample(r), r), 1u);
}

TEST(BetaPosterior, SampleMoments) {
  BetaPosterior p(1, 2.0, 5.0);
  RngStream r(2);
  double s = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) s += p.sample(r)[0].value;
  const double var = 2.0 * 5.0 / (49.0 * 8.0);
  EXPECT_NEAR(s / n, 2.0 / 7.0, 4 * std::sqrt(var / n));
}

TEST(GaussianPosterior, FlatPriorGivesSampleMean) {
  GaussianPosterior p(1, 0.0, 1e6, 1.0);
  const double xs[] = {0.3, 1.7, -0.4, 2.2};
  for (double x : xs) p.update(0, x);
  EXPECT_NEAR(p.mean[0], 0.95, 1e-9);
  EXPECT_NEAR(p.precision[0], 4.0, 1e-9);
}

TEST(GaussianPosterior, ConjugateFormula) {
  GaussianPosterior p(1, 1.0, 2.0, 0.5);
  p.update(0, 3.0);
  // precision 1/4 + 4, mean (1/4 * 1 + 4 * 3) / (17/4)
  EXPECT_DOUBLE_EQ(p.precision[0], 4.25);
  EXPECT_NEAR(p.mean[0], 12.25 / 4.25, 1e-15);
  EXPECT_THROW(GaussianPosterior(1, 0.0, 0.0, 1.0), ConfigError);
}

TEST(EpsilonGreedy, Schedule) {
  EXPECT_EQ(EGSchedule{5.0}.epsilon(1), 1.0);
  EXPECT_DOUBLE_EQ(EGSchedule{0.5}.epsilon(10000), 0.0025);
  EXPECT_DOUBLE_EQ(EGSchedule{1.0}.epsilon(4), 0.25);
  EXPECT_THROW((void)EGSchedule{1.0}.epsilon(0), ContractViolation);
}

TEST(Phe, HandValues) {
  EXPECT_EQ(phe_pseudo_count(1.0, 4), 4u);
  EXPECT_EQ(phe_pseudo_count(0.5, 3), 2u);
  EXPECT_EQ(phe_pseudo_count(2.0, 3), 6u);
  EXPECT_DOUBLE_EQ(phe_perturbed_mean(1.0, 2, 1.0, 2), 0.5);
}

TEST(Phe, UnpulledArmsAreUnexplored) {
  PheState s(3, 1.0, PheNoise::Bernoulli);
  s.update(1, 1.0);
  RngStream r(3);
  const auto sc = s.sample(r);
  EXPECT_TRUE(sc[0].is_infinite());
  EXPECT_FALSE(sc[1].is_infinite());
  EXPECT_TRUE(sc[2].is_infinite());
}

TEST(Phe, PerturbedMeanIsUnbiasedAndShrinks) {
  // With the plug-in equal to the empirical mean, E[perturbed] = empirical mean,
  // and the spread is the pseudo-sum spread divided by s + m.
  PheState st(1, 1.0, PheNoise::Bernoulli);
  for (int i = 0; i < 10; ++i) st.update(0, i < 3 ? 1.0 : 0.0);
  RngStream r(4);
  double s = 0, ss = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double v = st.sample(r)[0].value;
    s += v;
    ss += v * v;
  }
  const double mean = s / n, var = ss / n - mean * mean;
  const double want_var = 10 * 0.3 * 0.7 / 400.0;
  EXPECT_NEAR(mean, 0.3, 4 * std::sqrt(want_var / n));
  EXPECT_NEAR(var, want_var, 0.03 * want_var);
}

TEST(Phe, GaussianPseudoSumMoments) {
  PheState st(1, 2.0, PheNoise::Gaussian, 0.5);
  RngStream r(5);
  double s = 0, ss = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double z = st.pseudo_sum(0.2, 9, r);
    s += z;
    ss += z * z;
  }
  const double mean = s / n, var = ss / n - mean * mean;
  EXPECT_NEAR(mean, 1.8, 4 * std::sqrt(9 * 0.25 / n));
  EXPECT_NEAR(var, 9 * 0.25, 0.03 * 9 * 0.25);
  EXPECT_THROW(PheState(1, 0.0, PheNoise::Gaussian), ConfigError);
}
