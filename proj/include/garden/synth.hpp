#pragma once
// Spatial homophily generator: attributes uniform on the unit box, and each
// unordered pair linked independently with probability
// min(1, beta * exp(-alpha * ||x_u - x_v||)).

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "garden/error.hpp"
#include "garden/graph.hpp"
#include "garden/rng.hpp"

namespace garden::synth {

struct SynthConfig {
  std::size_t n = 200;
  std::size_t dim = 2;
  double alpha = 30.0;
  double beta = 5.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (n < 2) throw InputError("synthetic graph needs n >= 2");
    if (dim < 1) throw InputError("synthetic graph needs d >= 1");
    if (!(alpha >= 0) || !(beta >= 0)) throw InputError("alpha and beta must be non-negative");
  }
};

inline double edge_probability(double distance, double alpha, double beta) {
  return std::min(1.0, beta * std::exp(-alpha * distance));
}

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

// Edge stage only: links pairs of an existing attribute table. Pairs are
// visited in (u < v) lexicographic order, one uniform draw each.
inline AttributedGraph link_by_distance(std::size_t n, std::size_t dim,
                                        std::vector<double> attributes, double alpha,
                                        double beta, Rng& rng) {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    std::span<const double> xu(attributes.data() + u * dim, dim);
    for (NodeId v = u + 1; v < n; ++v) {
      std::span<const double> xv(attributes.data() + v * dim, dim);
      const double p = edge_probability(euclidean(xu, xv), alpha, beta);
      if (rng.uniform() < p) edges.emplace_back(u, v);
    }
  }
  return AttributedGraph(n, dim, edges, std::move(attributes));
}

inline AttributedGraph generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<double> attributes(cfg.n * cfg.dim);
  for (auto& x : attributes) x = rng.uniform();
  return link_by_distance(cfg.n, cfg.dim, std::move(attributes), cfg.alpha, cfg.beta, rng);
}

struct ConnectedDraw {
  AttributedGraph graph;         // largest connected component, re-indexed
  std::uint64_t seed = 0;        // seed of the draw it came from
  std::size_t attempts = 0;
  bool reached_threshold = false;
};

constexpr std::size_t kMaxConnectedAttempts = 100;
constexpr double kConnectedFraction = 0.9;

// Draws with derived seeds until the largest component covers at least 90% of
// the nodes; otherwise returns the best component seen after 100 attempts.
inline ConnectedDraw generate_connected(const SynthConfig& cfg) {
  cfg.validate();
  ConnectedDraw best;
  for (std::size_t attempt = 0; attempt < kMaxConnectedAttempts; ++attempt) {
    SynthConfig draw = cfg;
    draw.seed = attempt == 0 ? cfg.seed : derive_seed(cfg.seed, attempt);
    auto lcc = largest_connected_component(generate(draw));
    const bool better = attempt == 0 || lcc.graph.node_count() > best.graph.node_count();
    if (better) {
      best.graph = std::move(lcc.graph);
      best.seed = draw.seed;
    }
    best.attempts = attempt + 1;
    if (static_cast<double>(best.graph.node_count()) >= kConnectedFraction * cfg.n) {
      best.reached_threshold = true;
      break;
    }
  }
  return best;
}

}  // namespace garden::synth
