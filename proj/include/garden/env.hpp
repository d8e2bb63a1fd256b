#pragma once
// Message-passing episode engine. A single message starts at the source; the
// holder hands it to one neighbor per step. Delivery pays +1 and ends the
// episode; otherwise the episode is cut after max_steps actions.

#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "garden/error.hpp"
#include "garden/graph.hpp"

namespace garden {

constexpr std::size_t kDefaultMaxSteps = 100;

enum class EpisodeStatus { kRunning, kDelivered, kTruncated };

inline const char* status_name(EpisodeStatus s) {
  switch (s) {
    case EpisodeStatus::kRunning: return "running";
    case EpisodeStatus::kDelivered: return "delivered";
    case EpisodeStatus::kTruncated: return "truncated";
  }
  return "?";
}

struct EpisodeState {
  NodeId holder = 0;
  NodeId target = 0;
  std::size_t step = 0;
  std::size_t max_steps = kDefaultMaxSteps;
  EpisodeStatus status = EpisodeStatus::kRunning;

  bool running() const noexcept { return status == EpisodeStatus::kRunning; }
  friend bool operator==(const EpisodeState&, const EpisodeState&) = default;
};

// What the holder may see. The target id itself is deliberately absent: only
// its attributes and ego structure are exposed.
struct Observation {
  std::vector<EgoGraph> neighbor_egos;  // one per neighbor of the holder, ascending
  EgoGraph target_ego;
  std::vector<double> message;          // target attributes
};

struct Transition {
  NodeId from = 0;
  NodeId to = 0;
  double reward = 0.0;
  bool terminal = false;   // delivered
  bool truncated = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

inline EpisodeState reset(const AttributedGraph& g, NodeId src, NodeId tgt,
                          std::size_t max_steps = kDefaultMaxSteps) {
  g.check(src);
  g.check(tgt);
  if (src == tgt) throw InputError("source and target must differ");
  if (max_steps == 0) throw InputError("max_steps must be positive");
  return EpisodeState{src, tgt, 0, max_steps, EpisodeStatus::kRunning};
}

inline Observation observe(const AttributedGraph& g, const EpisodeState& s) {
  if (!s.running()) throw ContractError("observe() on a finished episode");
  Observation obs;
  for (NodeId v : g.neighbors(s.holder)) obs.neighbor_egos.push_back(ego_graph(g, v));
  obs.target_ego = ego_graph(g, s.target);
  auto m = g.attributes(s.target);
  obs.message.assign(m.begin(), m.end());
  return obs;
}

inline std::pair<EpisodeState, Transition> step(const AttributedGraph& g, EpisodeState s,
                                                NodeId action) {
  if (!s.running()) throw ContractError("step() on a finished episode");
  if (!g.has_edge(s.holder, action)) {
    throw IllegalActionError("node " + std::to_string(action) + " is not a neighbor of holder " +
                             std::to_string(s.holder));
  }
  Transition tr{s.holder, action, 0.0, false, false};
  s.holder = action;
  ++s.step;
  if (action == s.target) {
    s.status = EpisodeStatus::kDelivered;
    tr.reward = 1.0;
    tr.terminal = true;
  } else if (s.step >= s.max_steps) {
    s.status = EpisodeStatus::kTruncated;
    tr.truncated = true;
  }
  return {s, tr};
}

// Episode trace rows: episode_id,step,from,to,reward,status
inline void write_trace_header(std::ostream& os) { os << "episode_id,step,from,to,reward,status\n"; }

inline void write_trace(std::ostream& os, std::size_t episode_id,
                        std::span<const Transition> transitions) {
  for (std::size_t t = 0; t < transitions.size(); ++t) {
    const auto& tr = transitions[t];
    const char* status = tr.terminal ? "delivered" : tr.truncated ? "truncated" : "running";
    os << episode_id << ',' << t + 1 << ',' << tr.from << ',' << tr.to << ','
       << static_cast<int>(tr.reward) << ',' << status << '\n';
  }
}

}  // namespace garden
