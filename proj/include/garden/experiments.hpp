#pragma once
// End-to-end experiment drivers: one benchmark on a graph (split, pair sets,
// temperature tuning, training, test evaluation), the density sweep, per-action
// timing and the value-function export.

#include <chrono>
#include <cmath>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "garden/eval.hpp"
#include "garden/graph.hpp"
#include "garden/policies.hpp"
#include "garden/rng.hpp"
#include "garden/synth.hpp"
#include "garden/trainer.hpp"

namespace garden {

// Stream ids for seeds derived from a run seed.
namespace stream {
constexpr std::uint64_t kSplit = 0x73706c6974ULL;
constexpr std::uint64_t kValPairs = 0x76616c70ULL;
constexpr std::uint64_t kTestPairs = 0x74657374ULL;
constexpr std::uint64_t kEval = 0x6576616cULL;
constexpr std::uint64_t kTopology = 0x746f706fULL;
constexpr std::uint64_t kTiming = 0x74696d65ULL;
}  // namespace stream

struct PreparedGraph {
  NodeSplit split;
  PairSet val;
  PairSet test;
};

inline PreparedGraph prepare_pairs(const AttributedGraph& g, std::uint64_t seed,
                                   std::size_t val_pairs = 100, std::size_t test_pairs = 1000) {
  Rng rng(derive_seed(seed, stream::kSplit));
  PreparedGraph out;
  out.split = split_nodes(g, {}, rng);
  out.val = make_pair_set(g, out.split.val, val_pairs, "val", derive_seed(seed, stream::kValPairs));
  out.test =
      make_pair_set(g, out.split.test, test_pairs, "test", derive_seed(seed, stream::kTestPairs));
  return out;
}

struct BenchmarkConfig {
  std::vector<FeatureMode> models{FeatureMode::kGat};
  std::vector<double> tau_grid = train::default_tau_grid();
  train::TrainConfig train;
  std::size_t val_pairs = 100;
  std::size_t test_pairs = 1000;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
};

struct BenchmarkResult {
  Evaluation test;
  double distance_tau = 0;
  double connection_tau = 0;
  std::vector<train::TrainResult> trained;  // one per configured model
};

// The five-policy comparison of one graph: learned models plus the four walkers,
// all on the same serialized test pairs.
inline BenchmarkResult run_benchmark(const AttributedGraph& g, const BenchmarkConfig& cfg) {
  const auto prep = prepare_pairs(g, cfg.seed, cfg.val_pairs, cfg.test_pairs);
  EvalOptions opt;
  opt.max_steps = cfg.train.max_steps;
  opt.seed = derive_seed(cfg.seed, stream::kEval);
  opt.jobs = cfg.jobs;

  BenchmarkResult out;
  out.distance_tau =
      train::tune_temperature(g, WalkerKind::kDistance, cfg.tau_grid, prep.val, opt).best_tau;
  out.connection_tau =
      train::tune_temperature(g, WalkerKind::kConnection, cfg.tau_grid, prep.val, opt).best_tau;

  std::vector<std::unique_ptr<Policy>> owned;
  for (FeatureMode m : cfg.models) {
    auto tc = cfg.train;
    tc.model.mode = m;
    tc.seed = cfg.seed;
    tc.jobs = cfg.jobs;
    out.trained.push_back(train::train(g, prep.split.train, prep.val, tc));
    auto model = std::make_shared<const ActorCritic>(out.trained.back().best);
    owned.push_back(std::make_unique<LearnedPolicy>(model, g));
  }
  owned.push_back(std::make_unique<WalkerPolicy>(g, WalkerKind::kGreedy));
  owned.push_back(std::make_unique<WalkerPolicy>(g, WalkerKind::kDistance, out.distance_tau));
  owned.push_back(std::make_unique<WalkerPolicy>(g, WalkerKind::kConnection, out.connection_tau));
  owned.push_back(std::make_unique<WalkerPolicy>(g, WalkerKind::kRandom));

  std::vector<const Policy*> policies;
  for (auto& p : owned) policies.push_back(p.get());
  out.test = evaluate(g, policies, prep.test, opt);
  return out;
}

// ---------------------------------------------------------------------------
// Density sweep

struct SweepConfig {
  std::vector<double> betas{0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0};
  std::size_t n = 200;
  std::size_t dim = 2;
  double alpha = 30;
  std::size_t topologies = 10;
  std::size_t min_nodes = 10;  // smaller components are skipped
  BenchmarkConfig bench;
};

struct SweepRow {
  double beta = 0;
  std::string policy;
  std::string metric;  // oracle_ratio, trunc_rate or win_rate
  MeanCi value;        // over topologies
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::size_t> skipped;  // per beta
};

inline SweepResult sensitivity_sweep(const SweepConfig& cfg) {
  SweepResult out;
  for (std::size_t bi = 0; bi < cfg.betas.size(); ++bi) {
    const double beta = cfg.betas[bi];
    std::vector<std::string> names;
    std::vector<std::vector<double>> ratio, trunc, win;  // [policy][topology]
    std::size_t skipped = 0;
    for (std::size_t t = 0; t < cfg.topologies; ++t) {
      synth::SynthConfig sc;
      sc.n = cfg.n;
      sc.dim = cfg.dim;
      sc.alpha = cfg.alpha;
      sc.beta = beta;
      sc.seed = derive_seed(cfg.bench.seed, stream::kTopology, bi * 1000 + t);
      auto draw = synth::generate_connected(sc);
      if (draw.graph.node_count() < cfg.min_nodes) {
        ++skipped;
        continue;
      }
      auto bc = cfg.bench;
      bc.seed = sc.seed;
      auto res = run_benchmark(draw.graph, bc);
      if (names.empty()) {
        for (auto& r : res.test.reports) names.push_back(r.policy);
        ratio.resize(names.size());
        trunc.resize(names.size());
        win.resize(names.size());
      }
      for (std::size_t p = 0; p < names.size(); ++p) {
        ratio[p].push_back(res.test.reports[p].oracle_ratio.mean);
        trunc[p].push_back(res.test.reports[p].trunc_rate);
        win[p].push_back(res.test.reports[p].win_rate);
      }
    }
    for (std::size_t p = 0; p < names.size(); ++p) {
      out.rows.push_back({beta, names[p], "oracle_ratio", mean_with_ci(ratio[p])});
      out.rows.push_back({beta, names[p], "trunc_rate", mean_with_ci(trunc[p])});
      out.rows.push_back({beta, names[p], "win_rate", mean_with_ci(win[p])});
    }
    out.skipped.push_back(skipped);
  }
  return out;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& res) {
  os << "beta,policy,metric,value,ci\n";
  for (const auto& r : res.rows) {
    os << format_number(r.beta) << ',' << r.policy << ',' << r.metric << ','
       << format_number(r.value.mean) << ',' << format_number(r.value.half_width) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Runtime

struct ActionTiming {
  std::string graph;
  std::string policy;
  double action_ms = 0;
  double overhead_ms = std::numeric_limits<double>::quiet_NaN();  // per node embedding
  std::size_t actions = 0;
};

// Mean wall time of one act() call over episodes to `targets` random targets.
// Learned policies use a precomputed feature table and no logit memo, so each
// action pays the full f_pi evaluation over the neighborhood; building the
// table is reported separately as mean milliseconds per node.
inline ActionTiming measure_action_time(const AttributedGraph& g, const Policy& policy,
                                        std::size_t targets = 100,
                                        std::size_t max_steps = kDefaultMaxSteps,
                                        std::uint64_t seed = 0) {
  using clock = std::chrono::steady_clock;
  ActionTiming out;
  out.policy = policy.name();
  Rng pick(derive_seed(seed, stream::kTiming));
  double total_ns = 0;
  for (std::size_t i = 0; i < targets; ++i) {
    const auto tgt = static_cast<NodeId>(pick.below(g.node_count()));
    NodeId src;
    do {
      src = static_cast<NodeId>(pick.below(g.node_count()));
    } while (src == tgt);
    Rng rng(derive_seed(seed, i));
    auto actor = policy.begin_episode(tgt);
    EpisodeState s = reset(g, src, tgt, max_steps);
    while (s.running()) {
      const auto t0 = clock::now();
      const NodeId a = actor->act(s.holder, rng);
      const auto t1 = clock::now();
      total_ns += static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
      ++out.actions;
      s = step(g, s, a).first;
    }
  }
  out.action_ms = out.actions ? total_ns / 1e6 / static_cast<double>(out.actions) : 0.0;
  return out;
}

inline ActionTiming measure_learned_action_time(const AttributedGraph& g,
                                                std::shared_ptr<const ActorCritic> model,
                                                std::size_t targets = 100,
                                                std::size_t max_steps = kDefaultMaxSteps,
                                                std::uint64_t seed = 0) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  LearnedPolicy policy(model, g, /*precompute=*/true, /*memoize_logits=*/false);
  const auto t1 = clock::now();
  auto out = measure_action_time(g, policy, targets, max_steps, seed);
  out.overhead_ms = std::chrono::duration<double, std::milli>(t1 - t0).count() /
                    static_cast<double>(g.node_count());
  return out;
}

inline void write_timing_csv(std::ostream& os, const std::vector<ActionTiming>& rows) {
  os << "graph,policy,action_ms,overhead_ms\n";
  for (const auto& r : rows) {
    os << r.graph << ',' << r.policy << ',' << format_number(r.action_ms) << ','
       << format_number(r.overhead_ms) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Value function export

struct HeatmapRow {
  NodeId node = 0;
  double value = 0;
  double baseline_score = 0;  // -||x_u - x_tgt|| / tau
};

inline std::vector<HeatmapRow> export_value_heatmap(const AttributedGraph& g,
                                                    const ActorCritic& model, NodeId target,
                                                    double tau = 1.0) {
  g.check(target);
  if (!(tau > 0)) throw InputError("temperature must be positive");
  const auto table = compute_feature_table(model, g);
  const auto message = message_vector(model, g, target, &table);
  std::vector<HeatmapRow> rows(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) {
    rows[u] = {u, value_estimate(model, table[u], message),
               -synth::euclidean(g.attributes(u), g.attributes(target)) / tau};
  }
  return rows;
}

inline void write_heatmap_csv(std::ostream& os, const std::vector<HeatmapRow>& rows) {
  os << "node,value,baseline_score\n";
  for (const auto& r : rows) {
    os << r.node << ',' << format_number(r.value) << ',' << format_number(r.baseline_score) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Training curve

inline void write_curve_csv(std::ostream& os, const std::vector<train::CurveRow>& curve) {
  os << "episode,train_return,val_oracle_ratio,val_trunc_rate,entropy_mean\n";
  for (const auto& r : curve) {
    os << r.episode << ',' << format_number(r.train_return) << ','
       << format_number(r.val_oracle_ratio) << ',' << format_number(r.val_trunc_rate) << ','
       << format_number(r.entropy_mean) << '\n';
  }
}

inline void write_tune_csv(std::ostream& os, const std::string& walker,
                           const train::TuneResult& res) {
  os << "walker,tau,val_oracle_ratio\n";
  for (auto [tau, score] : res.curve) {
    os << walker << ',' << format_number(tau) << ',' << format_number(score) << '\n';
  }
}

}  // namespace garden
