#pragma once
// Serialized source-target pair sets, episode rollouts for frozen policies,
// and the three evaluation metrics.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <exception>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "garden/env.hpp"
#include "garden/error.hpp"
#include "garden/graph.hpp"
#include "garden/policies.hpp"
#include "garden/rng.hpp"

namespace garden {

struct SourceTarget {
  NodeId src = 0;
  NodeId tgt = 0;
  friend bool operator==(const SourceTarget&, const SourceTarget&) = default;
};

// Fixed list of (source, target) pairs replayed identically for every policy.
struct PairSet {
  std::string split;  // "train", "val" or "test"
  std::uint64_t seed = 0;
  std::vector<SourceTarget> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
  friend bool operator==(const PairSet&, const PairSet&) = default;
};

// Sources uniform over all nodes, targets uniform over `targets`, src != tgt.
inline PairSet make_pair_set(const AttributedGraph& g, std::span<const NodeId> targets,
                             std::size_t count, std::string split, std::uint64_t seed) {
  if (targets.empty()) throw ConfigError("pair set needs at least one target node");
  if (g.node_count() < 2) throw ConfigError("pair set needs at least two nodes");
  PairSet set{std::move(split), seed, {}};
  Rng rng(seed);
  set.pairs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const NodeId tgt = targets[rng.below(targets.size())];
    NodeId src;
    do {
      src = static_cast<NodeId>(rng.below(g.node_count()));
    } while (src == tgt);
    set.pairs.push_back({src, tgt});
  }
  return set;
}

inline void save_pair_set(const PairSet& set, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  os << "# split=" << set.split << " seed=" << set.seed << '\n';
  os << "pair_id,src,tgt\n";
  for (std::size_t i = 0; i < set.pairs.size(); ++i) {
    os << i << ',' << set.pairs[i].src << ',' << set.pairs[i].tgt << '\n';
  }
}

inline PairSet load_pair_set(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  PairSet set;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string tok;
      while (ls >> tok) {
        if (tok.rfind("split=", 0) == 0) set.split = tok.substr(6);
        if (tok.rfind("seed=", 0) == 0) set.seed = std::stoull(tok.substr(5));
      }
      continue;
    }
    if (line == "pair_id,src,tgt") continue;
    std::istringstream ls(line);
    std::size_t id = 0;
    long long src = -1, tgt = -1;
    char c1 = 0, c2 = 0;
    if (!(ls >> id >> c1 >> src >> c2 >> tgt) || c1 != ',' || c2 != ',' || src < 0 || tgt < 0 ||
        id != set.pairs.size()) {
      throw ParseError(path, lineno, "expected pair_id,src,tgt");
    }
    set.pairs.push_back({static_cast<NodeId>(src), static_cast<NodeId>(tgt)});
  }
  return set;
}

// Shortest-path length per pair. Throws if any pair is disconnected or
// degenerate.
inline std::vector<std::uint32_t> oracle_lengths(const AttributedGraph& g, const PairSet& set) {
  std::vector<std::uint32_t> out(set.size());
  std::vector<std::vector<HopCount>> by_target(g.node_count());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto [src, tgt] = set.pairs[i];
    g.check(src);
    g.check(tgt);
    if (by_target[tgt].empty()) by_target[tgt] = bfs_distances(g, tgt);
    const HopCount d = by_target[tgt][src];
    if (!d) {
      throw InputError("pair " + std::to_string(i) + " is unreachable; build pair sets on a "
                       "connected graph");
    }
    if (*d == 0) throw InputError("pair " + std::to_string(i) + " has src == tgt");
    out[i] = *d;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rollouts

struct EpisodeOutcome {
  std::size_t length = 0;  // actions taken; max_steps when truncated
  bool truncated = false;
};

inline std::uint64_t episode_seed(std::uint64_t seed, std::uint64_t salt, std::size_t pair_id) {
  return derive_seed(seed, salt, pair_id);
}

inline EpisodeOutcome run_episode(const AttributedGraph& g, const Policy& policy,
                                  SourceTarget pair, std::size_t max_steps, Rng& rng,
                                  std::vector<Transition>* trace = nullptr) {
  auto actor = policy.begin_episode(pair.tgt);
  EpisodeState s = reset(g, pair.src, pair.tgt, max_steps);
  while (s.running()) {
    const NodeId a = actor->act(s.holder, rng);
    auto [next, tr] = step(g, s, a);
    if (trace) trace->push_back(tr);
    s = next;
  }
  return {s.step, s.status == EpisodeStatus::kTruncated};
}

// ---------------------------------------------------------------------------
// Metrics

struct MeanCi {
  double mean = 0;
  double half_width = 0;  // 95% normal-approximation interval
};

inline MeanCi mean_with_ci(std::span<const double> xs) {
  MeanCi out;
  if (xs.empty()) return out;
  double s = 0;
  for (double x : xs) s += x;
  out.mean = s / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    out.half_width = 1.96 * sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return out;
}

// Mean over pairs of episode_length / shortest_path_length. Truncated
// episodes enter with their length, which equals max_steps.
inline MeanCi mean_oracle_ratio(std::span<const std::size_t> lengths,
                                std::span<const std::uint32_t> oracle) {
  if (lengths.size() != oracle.size()) throw ContractError("lengths and oracle differ in size");
  std::vector<double> ratios(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (oracle[i] == 0) throw InputError("oracle length 0 for pair " + std::to_string(i));
    ratios[i] = static_cast<double>(lengths[i]) / static_cast<double>(oracle[i]);
  }
  return mean_with_ci(ratios);
}

inline double truncation_rate(const std::vector<bool>& truncated) {
  if (truncated.empty()) return 0.0;
  const auto n = std::count(truncated.begin(), truncated.end(), true);
  return 100.0 * static_cast<double>(n) / static_cast<double>(truncated.size());
}

// lengths[p][i] = episode length of policy p on pair i. For each pair the
// shortest policy wins; ties go to a uniformly random member of the tie.
inline std::vector<double> win_rate(const std::vector<std::vector<std::size_t>>& lengths,
                                    Rng& rng) {
  const std::size_t policies = lengths.size();
  std::vector<double> rate(policies, 0.0);
  if (policies == 0) return rate;
  const std::size_t pairs = lengths[0].size();
  for (const auto& l : lengths) {
    if (l.size() != pairs) throw ContractError("policies were evaluated on different pair sets");
  }
  if (pairs == 0) return rate;
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < pairs; ++i) {
    std::size_t best = lengths[0][i];
    for (std::size_t p = 1; p < policies; ++p) best = std::min(best, lengths[p][i]);
    tied.clear();
    for (std::size_t p = 0; p < policies; ++p) {
      if (lengths[p][i] == best) tied.push_back(p);
    }
    const std::size_t winner = tied.size() == 1 ? tied[0] : tied[rng.below(tied.size())];
    rate[winner] += 1.0;
  }
  for (auto& r : rate) r = 100.0 * r / static_cast<double>(pairs);
  return rate;
}

struct MetricsReport {
  std::string policy;
  std::string feature_mode = "-";
  double temperature = std::numeric_limits<double>::quiet_NaN();
  MeanCi oracle_ratio;
  double trunc_rate = 0;
  double win_rate = 0;
  std::vector<std::size_t> lengths;
  std::vector<bool> truncated;
};

struct Evaluation {
  std::vector<MetricsReport> reports;  // one per policy, input order
  std::vector<std::uint32_t> oracle;
  PairSet pairs;
  std::uint64_t seed = 0;
};

struct EvalOptions {
  std::size_t max_steps = kDefaultMaxSteps;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

// Rolls out one policy on every pair. Episode i uses its own random stream, so
// results do not depend on the number of workers.
inline MetricsReport rollout_policy(const AttributedGraph& g, const Policy& policy,
                                    const PairSet& pairs, std::span<const std::uint32_t> oracle,
                                    const EvalOptions& opt) {
  MetricsReport rep;
  rep.policy = policy.name();
  rep.feature_mode = policy.feature_mode();
  rep.temperature = policy.temperature();
  const std::size_t n = pairs.size();
  std::vector<EpisodeOutcome> outcomes(n);
  auto work = [&](std::size_t i) {
    Rng rng(episode_seed(opt.seed, policy.stream_salt, i));
    outcomes[i] = run_episode(g, policy, pairs.pairs[i], opt.max_steps, rng);
  };
  const std::size_t jobs = std::max<std::size_t>(1, std::min(opt.jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::exception_ptr failure;
    std::mutex failure_mu;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        try {
          for (std::size_t i = next++; i < n; i = next++) work(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    if (failure) std::rethrow_exception(failure);
  }
  rep.lengths.resize(n);
  rep.truncated.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rep.lengths[i] = outcomes[i].length;
    rep.truncated[i] = outcomes[i].truncated;
  }
  rep.oracle_ratio = mean_oracle_ratio(rep.lengths, oracle);
  rep.trunc_rate = truncation_rate(rep.truncated);
  return rep;
}

constexpr std::uint64_t kWinRateStream = 0x77696e72617465ULL;

inline Evaluation evaluate(const AttributedGraph& g, std::span<const Policy* const> policies,
                           const PairSet& pairs, const EvalOptions& opt) {
  Evaluation ev;
  ev.pairs = pairs;
  ev.seed = opt.seed;
  ev.oracle = oracle_lengths(g, pairs);
  std::vector<std::vector<std::size_t>> lengths;
  for (const Policy* p : policies) {
    ev.reports.push_back(rollout_policy(g, *p, pairs, ev.oracle, opt));
    lengths.push_back(ev.reports.back().lengths);
  }
  Rng tie_rng(derive_seed(opt.seed, kWinRateStream));
  auto rates = win_rate(lengths, tie_rng);
  for (std::size_t p = 0; p < rates.size(); ++p) ev.reports[p].win_rate = rates[p];
  return ev;
}

// ---------------------------------------------------------------------------
// CSV output. Column order is fixed.

inline std::string format_number(double x) {
  if (std::isnan(x)) return "";
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

inline void write_episodes_csv(std::ostream& os, const Evaluation& ev) {
  os << "policy,pair_id,src,tgt,length,oracle,truncated\n";
  for (const auto& rep : ev.reports) {
    for (std::size_t i = 0; i < rep.lengths.size(); ++i) {
      os << rep.policy << ',' << i << ',' << ev.pairs.pairs[i].src << ',' << ev.pairs.pairs[i].tgt
         << ',' << rep.lengths[i] << ',' << ev.oracle[i] << ',' << (rep.truncated[i] ? 1 : 0)
         << '\n';
    }
  }
}

// The ci column is the half-width of a 95% normal-approximation interval over pairs.
inline void write_metrics_csv(std::ostream& os, const Evaluation& ev) {
  os << "policy,oracle_ratio,ci,trunc_rate,win_rate\n";
  for (const auto& rep : ev.reports) {
    os << rep.policy << ',' << format_number(rep.oracle_ratio.mean) << ','
       << format_number(rep.oracle_ratio.half_width) << ',' << format_number(rep.trunc_rate) << ','
       << format_number(rep.win_rate) << '\n';
  }
}

}  // namespace garden
