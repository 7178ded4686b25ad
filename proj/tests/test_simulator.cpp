#include <gtest/gtest.h>

#include <cmath>

#include "mbe/simulator.hpp"

using namespace mbe;

namespace {

SimConfig base_config() {
  SimConfig c;
  c.env = "mab:bernoulli:means=0,1";
  c.T = 1000;
  c.n_runs = 4;
  c.master_seed = 11;
  c.threads = 1;
  return c;
}

}  // namespace

TEST(Simulator, OracleHasZeroRegret) {
  auto c = base_config();
  c.env = "cascade:L=10:K=3";
  c.algorithms = {"oracle"};
  const auto res = run_experiment(c);
  for (const auto& run : res.raw[0])
    for (double v : run) EXPECT_EQ(v, 0.0);
}

TEST(Simulator, UniformOnTwoArmsMatchesBinomial) {
  auto c = base_config();
  c.n_runs = 1;
  c.algorithms = {"uniform"};
  const auto res = run_experiment(c);
  const double final = res.aggregate.series[0].mean.back();
  EXPECT_NEAR(final, 500.0, 3 * std::sqrt(250.0));
  EXPECT_EQ(res.aggregate.series[0].stderr_.back(), 0.0);
  EXPECT_EQ(final, std::round(final));
}

TEST(Simulator, RealizedAccountingUsesObservedRewards) {
  auto c = base_config();
  c.env = "mab:bernoulli:means=0.5,0.5";
  c.accounting = RegretAccounting::Realized;
  c.algorithms = {"oracle"};
  const auto res = run_experiment(c);
  bool nonzero = false;
  for (const auto& run : res.raw[0]) nonzero = nonzero || run.back() != 0.0;
  EXPECT_TRUE(nonzero);
  c.accounting = RegretAccounting::Expected;
  EXPECT_EQ(run_experiment(c).aggregate.series[0].mean.back(), 0.0);
}

TEST(Simulator, Checkpoints) {
  auto c = base_config();
  c.T = 1000;
  EXPECT_EQ(c.stride(), 5u);
  EXPECT_EQ(c.checkpoints().size(), 200u);
  EXPECT_EQ(c.checkpoints().back(), 1000u);
  c.T = 7;
  c.checkpoint_stride = 3;
  EXPECT_EQ(c.checkpoints(), (std::vector<std::size_t>{3, 6, 7}));
  c.T = 50;
  c.checkpoint_stride = 0;
  EXPECT_EQ(c.stride(), 1u);
}

TEST(Aggregate, TwoRunFormulas) {
  const auto s = aggregate_runs("x", {1, 2}, {{1.0, 2.0}, {3.0, 6.0}});
  EXPECT_EQ(s.mean, (std::vector<double>{2.0, 4.0}));
  // sd of {1,3} is sqrt(2); stderr sqrt(2)/sqrt(2) = 1. For {2,6}: sqrt(8)/sqrt(2) = 2.
  EXPECT_DOUBLE_EQ(s.stderr_[0], 1.0);
  EXPECT_DOUBLE_EQ(s.stderr_[1], 2.0);
  EXPECT_EQ(s.n_runs, 2u);
}

TEST(Simulator, IdenticalAcrossThreadCounts) {
  auto c = base_config();
  c.env = "mab:bernoulli:K=5";
  c.T = 300;
  c.n_runs = 6;
  c.algorithms = {"mbe:B=8", "ts:bernoulli", "eg"};
  const auto one = run_experiment(c);
  c.threads = 4;
  const auto four = run_experiment(c);
  EXPECT_EQ(one.raw, four.raw);
}

TEST(Simulator, AddingAnAlgorithmLeavesOthersUnchanged) {
  auto c = base_config();
  c.env = "mab:bernoulli:K=5";
  c.T = 200;
  c.algorithms = {"mbe:B=8"};
  const auto alone = run_experiment(c);
  c.algorithms = {"ts:bernoulli", "mbe:B=8"};
  const auto both = run_experiment(c);
  EXPECT_EQ(alone.raw[0], both.raw[1]);
}

TEST(Simulator, StderrShrinksWithRuns) {
  auto c = base_config();
  c.env = "mab:bernoulli:K=5";
  c.T = 200;
  c.algorithms = {"uniform"};
  c.n_runs = 400;
  const double s400 = run_experiment(c).aggregate.series[0].stderr_.back();
  c.n_runs = 1600;
  const double s1600 = run_experiment(c).aggregate.series[0].stderr_.back();
  // Quadrupling the runs halves the stderr, up to sampling noise in the sd itself.
  EXPECT_NEAR(s1600 / s400, 0.5, 0.1);
}

TEST(Simulator, ValidateErrors) {
  auto c = base_config();
  EXPECT_THROW(c.validate(), ConfigError);
  c.algorithms = {"mbe", "mbe"};
  EXPECT_THROW(c.validate(), ConfigError);
  c.algorithms = {"ts:bernoulli"};
  c.env = "cascade:L=10:K=2";
  EXPECT_THROW(c.validate(), ConfigError);
  c.env = "mab:bernoulli:K=3";
  c.n_runs = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Sweep, DefaultGrid) {
  EXPECT_EQ(default_sweep_grid(), (std::vector<double>{0.0625, 0.125, 0.25, 0.5, 1, 2, 4}));
}

TEST(Sweep, ArgminTiesGoToSmallerParameter) {
  std::vector<SweepPoint> pts = {{2.0, "a", 1.0, 0}, {0.5, "b", 1.0, 0}, {1.0, "c", 3.0, 0}};
  EXPECT_EQ(sweep_argmin(pts), 1u);
  pts[2].final_mean = 0.5;
  EXPECT_EQ(sweep_argmin(pts), 2u);
  EXPECT_EQ(sweep_argmin({{1.0, "x", 7.0, 0}}), 0u);
  EXPECT_THROW(sweep_argmin({}), ConfigError);
}

TEST(Sweep, ExpandsTunableAlgorithmsOnly) {
  auto c = base_config();
  c.env = "mab:bernoulli:K=3";
  c.T = 100;
  c.n_runs = 2;
  c.algorithms = {"mbe:B=4", "ts:bernoulli", "eg"};
  const auto res = sweep(c, {0.5, 1.0});
  ASSERT_EQ(res.entries.size(), 3u);
  EXPECT_EQ(res.entries[0].points.size(), 2u);
  EXPECT_EQ(*res.entries[0].key, "lambda");
  EXPECT_EQ(res.entries[1].points.size(), 1u);
  EXPECT_FALSE(res.entries[1].key);
  EXPECT_EQ(res.entries[2].points.size(), 2u);
  EXPECT_EQ(res.experiment.algorithms.size(), 5u);
  // The sweep shares streams with a direct run of the same concrete spec.
  auto direct = c;
  direct.algorithms = {res.entries[0].points[1].algorithm};
  EXPECT_EQ(run_experiment(direct).aggregate.series[0].mean.back(), res.entries[0].points[1].final_mean);
}
