#pragma once
// Attributed undirected graph shared by every other component, plus the
// structural queries the simulator and the metrics need.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "garden/error.hpp"
#include "garden/rng.hpp"

namespace garden {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

// Hop count; std::nullopt means the nodes are in different components.
using HopCount = std::optional<std::uint32_t>;

class AttributedGraph {
 public:
  AttributedGraph() = default;

  // attributes is row-major n x dim. Duplicate edges are merged; self-loops
  // and out-of-range endpoints are rejected.
  AttributedGraph(std::size_t n, std::size_t dim, std::span<const Edge> edges,
                  std::vector<double> attributes)
      : adjacency_(n), attributes_(std::move(attributes)), dim_(dim) {
    if (n == 0) throw InputError("graph must have at least one node");
    if (attributes_.size() != n * dim) {
      throw InputError("attribute table has " + std::to_string(attributes_.size()) +
                       " entries, expected " + std::to_string(n * dim));
    }
    for (auto [u, v] : edges) {
      if (u >= n || v >= n) throw InputError("edge endpoint out of range");
      if (u == v) throw InputError("self-loop on node " + std::to_string(u));
      adjacency_[u].push_back(v);
      adjacency_[v].push_back(u);
    }
    for (auto& list : adjacency_) {
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
      edge_count_ += list.size();
    }
    edge_count_ /= 2;
  }

  std::size_t node_count() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  std::size_t attribute_dim() const noexcept { return dim_; }

  // Ascending node ids.
  std::span<const NodeId> neighbors(NodeId u) const {
    check(u);
    return adjacency_[u];
  }

  std::size_t degree(NodeId u) const { return neighbors(u).size(); }

  std::span<const double> attributes(NodeId u) const {
    check(u);
    return {attributes_.data() + static_cast<std::size_t>(u) * dim_, dim_};
  }

  const std::vector<double>& attribute_table() const noexcept { return attributes_; }

  bool has_edge(NodeId u, NodeId v) const {
    auto list = neighbors(u);
    return std::binary_search(list.begin(), list.end(), v);
  }

  // Each undirected edge once, as (low, high), sorted.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count_);
    for (NodeId u = 0; u < node_count(); ++u) {
      for (NodeId v : adjacency_[u]) {
        if (u < v) out.emplace_back(u, v);
      }
    }
    return out;
  }

  void check(NodeId u) const {
    if (u >= adjacency_.size()) {
      throw InputError("node id " + std::to_string(u) + " out of range [0, " +
                       std::to_string(adjacency_.size()) + ")");
    }
  }

  friend bool operator==(const AttributedGraph&, const AttributedGraph&) = default;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<double> attributes_;
  std::size_t dim_ = 0;
  std::size_t edge_count_ = 0;
};

// The 1-hop induced subgraph around a node.
struct EgoGraph {
  NodeId center = 0;
  std::vector<NodeId> members;  // ascending, includes center
  std::vector<Edge> edges;      // (low, high), ascending

  friend bool operator==(const EgoGraph&, const EgoGraph&) = default;
};

inline std::vector<NodeId> neighbors(const AttributedGraph& g, NodeId u) {
  auto list = g.neighbors(u);
  return {list.begin(), list.end()};
}

inline EgoGraph ego_graph(const AttributedGraph& g, NodeId u) {
  EgoGraph ego;
  ego.center = u;
  auto nbrs = g.neighbors(u);
  ego.members.assign(nbrs.begin(), nbrs.end());
  ego.members.insert(std::upper_bound(ego.members.begin(), ego.members.end(), u), u);
  for (NodeId a : ego.members) {
    // Merge-walk the two sorted lists to find neighbors of a inside the ego set.
    auto list = g.neighbors(a);
    auto it = std::upper_bound(list.begin(), list.end(), a);
    auto mt = std::upper_bound(ego.members.begin(), ego.members.end(), a);
    while (it != list.end() && mt != ego.members.end()) {
      if (*it < *mt) {
        ++it;
      } else if (*mt < *it) {
        ++mt;
      } else {
        ego.edges.emplace_back(a, *it);
        ++it;
        ++mt;
      }
    }
  }
  return ego;
}

// Breadth-first distances from src to every node.
inline std::vector<HopCount> bfs_distances(const AttributedGraph& g, NodeId src) {
  g.check(src);
  std::vector<HopCount> dist(g.node_count());
  std::queue<NodeId> frontier;
  dist[src] = 0;
  frontier.push(src);
  while (!frontier.empty()) {
    NodeId u = frontier.front();
    frontier.pop();
    for (NodeId v : g.neighbors(u)) {
      if (!dist[v]) {
        dist[v] = *dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return dist;
}

inline HopCount shortest_path_length(const AttributedGraph& g, NodeId u, NodeId v) {
  g.check(v);
  return bfs_distances(g, u)[v];
}

// Component label per node; labels are assigned in order of smallest member id.
inline std::vector<std::size_t> component_labels(const AttributedGraph& g,
                                                 std::size_t* count = nullptr) {
  constexpr auto kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(g.node_count(), kNone);
  std::size_t next = 0;
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < g.node_count(); ++s) {
    if (label[s] != kNone) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId v : g.neighbors(u)) {
        if (label[v] == kNone) {
          label[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

inline bool is_connected(const AttributedGraph& g) {
  std::size_t count = 0;
  component_labels(g, &count);
  return count == 1;
}

// Induced subgraph on `keep` (ascending, unique). Ids are re-densified in order.
inline AttributedGraph induced_subgraph(const AttributedGraph& g,
                                        std::span<const NodeId> keep) {
  std::vector<std::optional<NodeId>> remap(g.node_count());
  for (std::size_t i = 0; i < keep.size(); ++i) remap[keep[i]] = static_cast<NodeId>(i);
  std::vector<Edge> edges;
  std::vector<double> attrs;
  attrs.reserve(keep.size() * g.attribute_dim());
  for (NodeId old : keep) {
    auto row = g.attributes(old);
    attrs.insert(attrs.end(), row.begin(), row.end());
    for (NodeId v : g.neighbors(old)) {
      if (old < v && remap[v]) edges.emplace_back(*remap[old], *remap[v]);
    }
  }
  return AttributedGraph(keep.size(), g.attribute_dim(), edges, std::move(attrs));
}

struct ComponentExtraction {
  AttributedGraph graph;
  std::vector<NodeId> new_to_old;
  std::vector<std::optional<NodeId>> old_to_new;
};

// Largest connected component, re-indexed. Among equally large components the
// one holding the smallest node id wins.
inline ComponentExtraction largest_connected_component(const AttributedGraph& g) {
  std::size_t count = 0;
  auto label = component_labels(g, &count);
  std::vector<std::size_t> size(count, 0);
  for (auto l : label) ++size[l];
  const std::size_t best =
      static_cast<std::size_t>(std::max_element(size.begin(), size.end()) - size.begin());

  ComponentExtraction out;
  out.old_to_new.resize(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (label[u] == best) {
      out.old_to_new[u] = static_cast<NodeId>(out.new_to_old.size());
      out.new_to_old.push_back(u);
    }
  }
  out.graph = induced_subgraph(g, out.new_to_old);
  return out;
}

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct NodeSplit {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
};

// Uniformly random partition of [0, n). Validation and test sizes are the
// rounded ratio shares; training takes the remainder.
inline NodeSplit split_nodes(std::size_t n, SplitRatios ratios, Rng& rng) {
  if (ratios.train <= 0 || ratios.val <= 0 || ratios.test <= 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be positive and sum to 1");
  }
  const auto n_val = static_cast<std::size_t>(std::llround(ratios.val * n));
  const auto n_test = static_cast<std::size_t>(std::llround(ratios.test * n));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= n) {
    throw ConfigError("cannot split " + std::to_string(n) +
                      " nodes into three non-empty sets with the given ratios");
  }
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  NodeSplit split;
  split.val.assign(order.begin(), order.begin() + n_val);
  split.test.assign(order.begin() + n_val, order.begin() + n_val + n_test);
  split.train.assign(order.begin() + n_val + n_test, order.end());
  for (auto* set : {&split.train, &split.val, &split.test}) std::sort(set->begin(), set->end());
  return split;
}

inline NodeSplit split_nodes(const AttributedGraph& g, SplitRatios ratios, Rng& rng) {
  return split_nodes(g.node_count(), ratios, rng);
}

struct PathStats {
  double mean_shortest_path = 0;  // l_G over unordered pairs
  double density = 0;             // 2m / (n(n-1))
};

inline PathStats mean_shortest_path_and_density(const AttributedGraph& g) {
  const std::size_t n = g.node_count();
  PathStats stats;
  if (n < 2) return stats;
  double total = 0;
  for (NodeId u = 0; u < n; ++u) {
    auto dist = bfs_distances(g, u);
    for (NodeId v = u + 1; v < n; ++v) {
      if (!dist[v]) {
        throw InputError("graph is disconnected; extract largest_connected_component first");
      }
      total += *dist[v];
    }
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  stats.mean_shortest_path = total / pairs;
  stats.density = static_cast<double>(g.edge_count()) / pairs;
  return stats;
}

// ---------------------------------------------------------------------------
// Plain-text serialization: an edge list ("u v" per line) and an attribute
// file (line i holds the d values of node i).

inline void write_edge_list(const AttributedGraph& g, std::ostream& os) {
  for (auto [u, v] : g.edges()) os << u << ' ' << v << '\n';
}

inline void write_attributes(const AttributedGraph& g, std::ostream& os) {
  for (NodeId u = 0; u < g.node_count(); ++u) {
    auto row = g.attributes(u);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) os << ' ';
      // Integral values (binary features) print without exponent noise.
      if (row[k] == std::floor(row[k]) && std::abs(row[k]) < 1e15) {
        os << static_cast<long long>(row[k]);
      } else {
        os << std::setprecision(17) << row[k];
      }
    }
    os << '\n';
  }
}

inline void save_graph(const AttributedGraph& g, const std::string& edge_path,
                       const std::string& attr_path) {
  std::ofstream edges(edge_path), attrs(attr_path);
  if (!edges || !attrs) throw ConfigError("cannot open graph output files for writing");
  write_edge_list(g, edges);
  write_attributes(g, attrs);
}

inline AttributedGraph load_graph(const std::string& edge_path, const std::string& attr_path) {
  std::ifstream attrs(attr_path);
  if (!attrs) throw ConfigError("cannot open " + attr_path);
  std::vector<double> table;
  std::size_t dim = 0, n = 0, lineno = 0;
  std::string line;
  while (std::getline(attrs, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream is(line);
    std::size_t width = 0;
    std::string tok;
    while (is >> tok) {
      try {
        std::size_t used = 0;
        table.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError(attr_path, lineno, "not a number: '" + tok + "'");
      }
      ++width;
    }
    if (n == 0) dim = width;
    if (width != dim) {
      throw ParseError(attr_path, lineno,
                       "expected " + std::to_string(dim) + " values, got " + std::to_string(width));
    }
    ++n;
  }
  std::ifstream edge_file(edge_path);
  if (!edge_file) throw ConfigError("cannot open " + edge_path);
  std::vector<Edge> edges;
  lineno = 0;
  while (std::getline(edge_file, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream is(line);
    long long u = -1, v = -1;
    std::string extra;
    if (!(is >> u >> v) || (is >> extra) || u < 0 || v < 0) {
      throw ParseError(edge_path, lineno, "expected two non-negative node ids");
    }
    if (static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n) {
      throw ParseError(edge_path, lineno, "node id exceeds attribute rows");
    }
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return AttributedGraph(n, dim, edges, std::move(table));
}

}  // namespace garden
