#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "garden/env.hpp"
#include "support.hpp"

using namespace garden;
using namespace testing_support;

TEST(Env, ResetStartsAtSource) {
  auto g = random_connected_graph(20, 0.1, 1);
  Rng rng(0);
  for (int i = 0; i < 1000; ++i) {
    const auto src = static_cast<NodeId>(rng.below(20));
    const auto tgt = static_cast<NodeId>((src + 1 + rng.below(19)) % 20);
    auto s = reset(g, src, tgt);
    EXPECT_EQ(s.holder, src);
    EXPECT_EQ(s.step, 0u);
    EXPECT_TRUE(s.running());
  }
  EXPECT_THROW(reset(g, 3, 3), InputError);
  EXPECT_THROW(reset(g, 3, 40), InputError);
  EXPECT_THROW(reset(g, 3, 4, 0), InputError);
}

TEST(Env, DeliveryPaysOne) {
  auto g = path_graph(3);
  auto s = reset(g, 0, 2);
  auto [s1, t1] = step(g, s, 1);
  EXPECT_EQ(t1.reward, 0.0);
  EXPECT_TRUE(s1.running());
  auto [s2, t2] = step(g, s1, 2);
  EXPECT_EQ(t2.reward, 1.0);
  EXPECT_TRUE(t2.terminal);
  EXPECT_FALSE(t2.truncated);
  EXPECT_EQ(s2.status, EpisodeStatus::kDelivered);
  EXPECT_EQ(s2.holder, s2.target);
  EXPECT_THROW(step(g, s2, 1), ContractError);
  EXPECT_THROW(observe(g, s2), ContractError);
}

TEST(Env, IllegalActionIsNotMasked) {
  auto g = path_graph(4);
  auto s = reset(g, 0, 3);
  EXPECT_THROW(step(g, s, 2), IllegalActionError);
  EXPECT_THROW(step(g, s, 0), IllegalActionError);
}

TEST(Env, TruncatesAfterMaxStepsActions) {
  // Bounce between 0 and 1 on a path 0-1-2 whose target is 2.
  auto g = path_graph(3);
  auto s = reset(g, 0, 2, 100);
  double total = 0;
  for (int t = 0; t < 100; ++t) {
    ASSERT_TRUE(s.running());
    auto [next, tr] = step(g, s, s.holder == 0 ? 1 : 0);
    total += tr.reward;
    EXPECT_EQ(tr.truncated, t == 99);
    s = next;
  }
  EXPECT_EQ(s.status, EpisodeStatus::kTruncated);
  EXPECT_EQ(s.step, 100u);
  EXPECT_EQ(total, 0.0);
}

TEST(Env, DeliveryOnLastAllowedStepIsNotTruncation) {
  auto g = path_graph(2);
  auto s = reset(g, 0, 1, 1);
  auto [next, tr] = step(g, s, 1);
  EXPECT_TRUE(tr.terminal);
  EXPECT_FALSE(tr.truncated);
  EXPECT_EQ(next.status, EpisodeStatus::kDelivered);
}

TEST(Env, ObservationShapes) {
  auto g = path_graph(4);
  auto obs = observe(g, reset(g, 0, 3));
  ASSERT_EQ(obs.neighbor_egos.size(), 1u);
  EXPECT_EQ(obs.neighbor_egos[0].center, 1u);
  EXPECT_EQ(obs.target_ego.center, 3u);
  EXPECT_EQ(obs.message, (std::vector<double>{3.0}));

  // Holder adjacent to the target sees it both ways.
  auto adj = observe(g, reset(g, 2, 3));
  bool seen = false;
  for (const auto& e : adj.neighbor_egos) seen = seen || e.center == 3;
  EXPECT_TRUE(seen);
  EXPECT_EQ(adj.target_ego.center, 3u);
}

TEST(Env, ObservationStaysInsideListedEgos) {
  auto g = random_connected_graph(25, 0.15, 4);
  for (NodeId h = 0; h < 25; ++h) {
    const NodeId tgt = (h + 7) % 25;
    auto obs = observe(g, reset(g, h, tgt));
    std::set<NodeId> allowed;
    for (const auto& e : obs.neighbor_egos) allowed.insert(e.members.begin(), e.members.end());
    allowed.insert(obs.target_ego.members.begin(), obs.target_ego.members.end());
    for (const auto& e : obs.neighbor_egos)
      for (auto [a, b] : e.edges) {
        EXPECT_TRUE(allowed.count(a) && allowed.count(b));
        EXPECT_TRUE(g.has_edge(a, b));
      }
    EXPECT_EQ(obs.neighbor_egos.size(), g.degree(h));
  }
}

TEST(Env, ReplayReproducesTransitions) {
  auto g = random_connected_graph(30, 0.1, 6);
  Rng rng(3);
  std::vector<NodeId> actions;
  std::vector<Transition> first;
  auto s = reset(g, 0, 29, 40);
  while (s.running()) {
    auto nbrs = g.neighbors(s.holder);
    const NodeId a = nbrs[rng.below(nbrs.size())];
    actions.push_back(a);
    auto [next, tr] = step(g, s, a);
    first.push_back(tr);
    s = next;
  }
  s = reset(g, 0, 29, 40);
  for (std::size_t i = 0; i < actions.size(); ++i) {
    auto [next, tr] = step(g, s, actions[i]);
    EXPECT_EQ(tr, first[i]);
    s = next;
  }
  double rewards = 0;
  for (auto& t : first) rewards += t.reward;
  EXPECT_TRUE(rewards == 0.0 || rewards == 1.0);
  EXPECT_EQ(rewards == 1.0, first.back().terminal);
  EXPECT_LE(first.size(), 40u);
}

TEST(Env, TraceCsv) {
  std::ostringstream os;
  write_trace_header(os);
  std::vector<Transition> trs{{0, 1, 0, false, false}, {1, 2, 1, true, false}};
  write_trace(os, 7, trs);
  EXPECT_EQ(os.str(),
            "episode_id,step,from,to,reward,status\n7,1,0,1,0,running\n7,2,1,2,1,delivered\n");
}
