#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "garden/eval.hpp"
#include "support.hpp"

using namespace garden;
using namespace testing_support;

TEST(Metrics, OracleRatioExample) {
  std::vector<std::size_t> lengths{4, 6};
  std::vector<std::uint32_t> oracle{2, 3};
  EXPECT_DOUBLE_EQ(mean_oracle_ratio(lengths, oracle).mean, 2.0);
  std::vector<std::uint32_t> zero{0, 3};
  EXPECT_THROW(mean_oracle_ratio(lengths, zero), InputError);
}

TEST(Metrics, TruncationRateExample) {
  std::vector<bool> t(20, false);
  t[1] = t[7] = t[19] = true;
  EXPECT_DOUBLE_EQ(truncation_rate(t), 15.0);
  EXPECT_EQ(truncation_rate({}), 0.0);
}

TEST(Metrics, WinRateSplitsTiesAndSumsToHundred) {
  Rng rng(1);
  std::vector<std::vector<std::size_t>> lengths{{3, 5, 2, 9}, {4, 5, 2, 1}, {3, 6, 8, 9}};
  auto w = win_rate(lengths, rng);
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 100.0, 1e-12);
  // Pair 3 goes to policy 1 outright; pair 0 is shared by 0 and 2.
  EXPECT_GE(w[1], 25.0);
  Rng r2(2);
  std::vector<std::vector<std::size_t>> bad{{1, 2}, {1}};
  EXPECT_THROW(win_rate(bad, r2), ContractError);
}

TEST(Metrics, TiesBreakUniformly) {
  Rng rng(3);
  std::vector<std::vector<std::size_t>> lengths{std::vector<std::size_t>(20000, 5),
                                                std::vector<std::size_t>(20000, 5)};
  auto w = win_rate(lengths, rng);
  // 3 sigma of a fair coin over 20000 pairs, in percent.
  EXPECT_NEAR(w[0], 50.0, 300.0 * std::sqrt(0.25 / 20000));
}

TEST(Metrics, MatchBruteForceReference) {
  std::mt19937 gen(5);
  std::uniform_int_distribution<int> len(1, 100), orc(1, 10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::size_t> l(37);
    std::vector<std::uint32_t> o(37);
    std::vector<bool> t(37);
    for (std::size_t i = 0; i < l.size(); ++i) {
      l[i] = static_cast<std::size_t>(len(gen));
      o[i] = static_cast<std::uint32_t>(orc(gen));
      t[i] = l[i] == 100;
    }
    EXPECT_NEAR(mean_oracle_ratio(l, o).mean, static_cast<double>(ref_oracle_ratio(l, o)), 1e-9);
    EXPECT_NEAR(truncation_rate(t), ref_trunc_rate(t), 1e-9);
  }
}

TEST(Metrics, ConfidenceHalfWidth) {
  std::vector<double> xs{1, 2, 3, 4};
  auto ci = mean_with_ci(xs);
  EXPECT_DOUBLE_EQ(ci.mean, 2.5);
  EXPECT_NEAR(ci.half_width, 1.96 * std::sqrt(5.0 / 3.0) / 2.0, 1e-12);
}

TEST(PairSet, SerializationRoundTrip) {
  TempDir dir("pairs");
  auto g = random_connected_graph(30, 0.1, 2);
  std::vector<NodeId> targets{3, 4, 5};
  auto set = make_pair_set(g, targets, 50, "test", 99);
  for (auto [s, t] : set.pairs) {
    EXPECT_NE(s, t);
    EXPECT_TRUE(t >= 3 && t <= 5);
  }
  save_pair_set(set, dir.file("p.csv"));
  EXPECT_EQ(load_pair_set(dir.file("p.csv")), set);
  EXPECT_EQ(make_pair_set(g, targets, 50, "test", 99), set);
  dir.write("bad.csv", "pair_id,src,tgt\n0,1,2\n2,1,2\n");
  try {
    load_pair_set(dir.file("bad.csv"));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(PairSet, OracleRejectsUnreachable) {
  auto g = make_graph(4, {{0, 1}, {2, 3}});
  PairSet set{"val", 0, {{0, 2}}};
  EXPECT_THROW(oracle_lengths(g, set), InputError);
  PairSet same{"val", 0, {{1, 1}}};
  EXPECT_THROW(oracle_lengths(g, same), InputError);
}

TEST(Rollouts, GreedyIsOptimalOnCompleteGraphs) {
  auto g = random_graph(12, 1.0, 4, 2);
  std::vector<NodeId> all(12);
  std::iota(all.begin(), all.end(), 0);
  auto pairs = make_pair_set(g, all, 40, "test", 1);
  WalkerPolicy greedy(g, WalkerKind::kGreedy);
  auto rep = rollout_policy(g, greedy, pairs, oracle_lengths(g, pairs), {});
  EXPECT_DOUBLE_EQ(rep.oracle_ratio.mean, 1.0);
  EXPECT_EQ(rep.trunc_rate, 0.0);
}

TEST(Rollouts, RandomWalkOnThreeNodePathAbsorbsInFour) {
  // From one end: first step forced, then each visit to the middle ends with
  // probability 1/2 or costs two more steps. Mean 4, variance 8.
  auto g = path_graph(3);
  const std::size_t n = 20000;
  PairSet pairs{"test", 0, std::vector<SourceTarget>(n, {0, 2})};
  WalkerPolicy rw(g, WalkerKind::kRandom);
  EvalOptions opt;
  opt.seed = 12;
  auto rep = rollout_policy(g, rw, pairs, oracle_lengths(g, pairs), opt);
  EXPECT_NEAR(rep.oracle_ratio.mean, 2.0, 3 * std::sqrt(8.0 / n) / 2.0);
}

TEST(Rollouts, IndependentOfWorkerCount) {
  auto g = random_connected_graph(40, 0.08, 6, 2);
  std::vector<NodeId> targets{1, 2, 3, 4};
  auto pairs = make_pair_set(g, targets, 60, "test", 5);
  WalkerPolicy dw(g, WalkerKind::kDistance, 0.1);
  EvalOptions one, many;
  one.seed = many.seed = 8;
  many.jobs = 4;
  const auto oracle = oracle_lengths(g, pairs);
  auto a = rollout_policy(g, dw, pairs, oracle, one);
  auto b = rollout_policy(g, dw, pairs, oracle, many);
  auto c = rollout_policy(g, dw, pairs, oracle, one);
  EXPECT_EQ(a.lengths, b.lengths);
  EXPECT_EQ(a.lengths, c.lengths);
  EXPECT_EQ(a.truncated, b.truncated);
}

TEST(Rollouts, TruncationNonIncreasingInHorizon) {
  auto g = random_connected_graph(60, 0.05, 3, 2);
  std::vector<NodeId> targets{0, 1, 2, 3, 4, 5};
  auto pairs = make_pair_set(g, targets, 200, "test", 2);
  const auto oracle = oracle_lengths(g, pairs);
  WalkerPolicy rw(g, WalkerKind::kRandom);
  std::vector<bool> prev;
  double prev_rate = 101;
  for (std::size_t t : {5, 10, 20, 50, 100, 200}) {
    EvalOptions opt;
    opt.max_steps = t;
    opt.seed = 1;
    auto rep = rollout_policy(g, rw, pairs, oracle, opt);
    EXPECT_LE(rep.trunc_rate, prev_rate);
    // Same random stream per pair: a walk truncated at a longer horizon was
    // also truncated at every shorter one.
    for (std::size_t i = 0; i < prev.size(); ++i) {
      if (rep.truncated[i]) {
        EXPECT_TRUE(prev[i]) << "pair " << i;
      }
    }
    prev = rep.truncated;
    prev_rate = rep.trunc_rate;
  }
}

TEST(Rollouts, TruncatedEpisodesCountAtHorizon) {
  auto g = path_graph(30);
  PairSet pairs{"test", 0, {{0, 29}}};
  WalkerPolicy rw(g, WalkerKind::kRandom);
  EvalOptions opt;
  opt.max_steps = 5;
  auto rep = rollout_policy(g, rw, pairs, oracle_lengths(g, pairs), opt);
  EXPECT_TRUE(rep.truncated[0]);
  EXPECT_EQ(rep.lengths[0], 5u);
  EXPECT_DOUBLE_EQ(rep.oracle_ratio.mean, 5.0 / 29.0);
}

TEST(Evaluate, CsvLayout) {
  auto g = path_graph(3);
  PairSet pairs{"test", 0, {{0, 2}, {2, 0}}};
  WalkerPolicy greedy(g, WalkerKind::kGreedy);
  const Policy* ps[] = {&greedy};
  auto ev = evaluate(g, ps, pairs, {});
  std::ostringstream ep, me;
  write_episodes_csv(ep, ev);
  write_metrics_csv(me, ev);
  EXPECT_EQ(ep.str(),
            "policy,pair_id,src,tgt,length,oracle,truncated\n"
            "GreedyWalker,0,0,2,2,2,0\nGreedyWalker,1,2,0,2,2,0\n");
  EXPECT_EQ(me.str(), "policy,oracle_ratio,ci,trunc_rate,win_rate\nGreedyWalker,1,0,0,100\n");
}
