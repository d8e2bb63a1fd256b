#pragma once
// Reader for the SNAP Facebook ego networks (<id>.edges, <id>.feat,
// <id>.egofeat, <id>.featnames). The edges file omits ego edges, so the ego
// is linked to every alter before the largest component is taken.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "garden/error.hpp"
#include "garden/graph.hpp"

namespace garden::snap {

struct EgoNetFiles {
  std::string edges_path;
  std::string feat_path;
  std::string egofeat_path;
  std::string featnames_path;

  // Paths for <dir>/<id>.{edges,feat,egofeat,featnames}.
  static EgoNetFiles in(const std::filesystem::path& dir, const std::string& id) {
    auto p = [&](const char* ext) { return (dir / (id + ext)).string(); };
    return {p(".edges"), p(".feat"), p(".egofeat"), p(".featnames")};
  }
};

struct IngestedGraph {
  std::string name;                    // ego id
  AttributedGraph graph;               // LCC, dense ids
  std::vector<long long> external_id;  // dense id -> SNAP id
  long long ego_id = 0;
  std::size_t raw_nodes = 0;           // alters + ego, before the LCC
};

namespace detail {

inline std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return in;
}

inline bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

inline long long parse_id(const std::string& tok, const std::string& file, std::size_t line) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(tok, &used);
    if (used == tok.size() && v >= 0) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(file, line, "bad node id '" + tok + "'");
}

inline std::vector<double> parse_bits(std::istringstream& is, const std::string& file,
                                      std::size_t line) {
  std::vector<double> row;
  std::string tok;
  while (is >> tok) {
    if (tok == "0") row.push_back(0.0);
    else if (tok == "1") row.push_back(1.0);
    else throw ParseError(file, line, "feature value '" + tok + "' is not 0 or 1");
  }
  return row;
}

inline std::size_t count_lines(const std::string& path) {
  auto in = open(path);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) n += !blank(line);
  return n;
}

}  // namespace detail

inline long long ego_id_of(const EgoNetFiles& files) {
  const std::string stem = std::filesystem::path(files.edges_path).stem().string();
  return detail::parse_id(stem, files.edges_path, 0);
}

inline IngestedGraph ingest(const EgoNetFiles& files) {
  IngestedGraph out{std::filesystem::path(files.edges_path).stem().string(),
                    AttributedGraph(1, 0, {}, {}), {}, ego_id_of(files), 0};
  const std::size_t dim = detail::count_lines(files.featnames_path);

  std::map<long long, std::vector<double>> rows;
  {
    auto in = detail::open(files.feat_path);
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
      if (detail::blank(line)) continue;
      std::istringstream is(line);
      std::string tok;
      is >> tok;
      const long long id = detail::parse_id(tok, files.feat_path, lineno);
      auto row = detail::parse_bits(is, files.feat_path, lineno);
      if (row.size() != dim) {
        throw SchemaError(files.feat_path + ":" + std::to_string(lineno) + ": " +
                          std::to_string(row.size()) + " features, featnames lists " +
                          std::to_string(dim));
      }
      if (id == out.ego_id) throw SchemaError(files.feat_path + ": ego listed as an alter");
      if (!rows.emplace(id, std::move(row)).second) {
        throw ParseError(files.feat_path, lineno, "duplicate node " + tok);
      }
    }
  }
  {
    auto in = detail::open(files.egofeat_path);
    std::string line;
    std::vector<double> ego;
    std::size_t lineno = 0, seen = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::blank(line)) continue;
      if (++seen > 1) throw ParseError(files.egofeat_path, lineno, "expected a single row");
      std::istringstream is(line);
      ego = detail::parse_bits(is, files.egofeat_path, lineno);
    }
    if (seen == 0) throw ParseError(files.egofeat_path, lineno, "empty file");
    if (ego.size() != dim) {
      throw SchemaError(files.egofeat_path + ": " + std::to_string(ego.size()) +
                        " features, featnames lists " + std::to_string(dim));
    }
    rows.emplace(out.ego_id, std::move(ego));
  }

  // Dense ids follow ascending SNAP id.
  std::map<long long, NodeId> dense;
  std::vector<long long> external;
  std::vector<double> table;
  for (auto& [id, row] : rows) {
    dense.emplace(id, static_cast<NodeId>(external.size()));
    external.push_back(id);
    table.insert(table.end(), row.begin(), row.end());
  }

  std::vector<Edge> edges;
  {
    auto in = detail::open(files.edges_path);
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
      if (detail::blank(line)) continue;
      std::istringstream is(line);
      std::string a, b, extra;
      if (!(is >> a >> b) || (is >> extra)) {
        throw ParseError(files.edges_path, lineno, "expected 'u v'");
      }
      const long long u = detail::parse_id(a, files.edges_path, lineno);
      const long long v = detail::parse_id(b, files.edges_path, lineno);
      auto iu = dense.find(u), iv = dense.find(v);
      if (iu == dense.end() || iv == dense.end()) {
        throw SchemaError(files.edges_path + ":" + std::to_string(lineno) +
                          ": node without a feature row");
      }
      if (u == v) continue;
      edges.emplace_back(iu->second, iv->second);
    }
  }
  const NodeId ego = dense.at(out.ego_id);
  for (NodeId u = 0; u < external.size(); ++u) {
    if (u != ego) edges.emplace_back(ego, u);
  }

  out.raw_nodes = external.size();
  AttributedGraph full(external.size(), dim, edges, std::move(table));
  auto lcc = largest_connected_component(full);
  out.graph = std::move(lcc.graph);
  for (NodeId old : lcc.new_to_old) out.external_id.push_back(external[old]);
  return out;
}

// id map rows: node,snap_id
inline void write_id_map(const IngestedGraph& g, std::ostream& os) {
  os << "node,snap_id\n";
  for (std::size_t i = 0; i < g.external_id.size(); ++i) os << i << ',' << g.external_id[i] << '\n';
}

constexpr std::size_t kMinNodes = 100;
constexpr std::size_t kMaxNodes = 600;

struct GraphStats {
  std::string name;
  std::size_t n = 0;
  double mean_shortest_path = 0;
  double density = 0;
  std::size_t dim = 0;
};

inline GraphStats stats_of(const IngestedGraph& g) {
  auto ps = mean_shortest_path_and_density(g.graph);
  return {g.name, g.graph.node_count(), ps.mean_shortest_path, ps.density,
          g.graph.attribute_dim()};
}

// Every <id>.edges in the directory, ordered by numeric id.
inline std::vector<EgoNetFiles> discover(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError(dir.string() + " is not a directory");
  std::vector<std::pair<long long, EgoNetFiles>> found;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".edges") continue;
    const std::string stem = entry.path().stem().string();
    if (stem.empty() || !std::all_of(stem.begin(), stem.end(), ::isdigit)) continue;
    found.emplace_back(std::stoll(stem), EgoNetFiles::in(dir, stem));
  }
  if (found.empty()) throw ConfigError("no <id>.edges files in " + dir.string());
  std::sort(found.begin(), found.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<EgoNetFiles> out;
  for (auto& f : found) out.push_back(std::move(f.second));
  return out;
}

inline bool in_selection_range(std::size_t n) { return n >= kMinNodes && n <= kMaxNodes; }

// Ingest every ego network and keep those whose LCC has 100..600 nodes,
// ascending by node count (ties by ego id).
inline std::vector<IngestedGraph> select_experiment_graphs(const std::filesystem::path& dir) {
  std::vector<IngestedGraph> kept;
  for (const auto& files : discover(dir)) {
    auto g = ingest(files);
    if (in_selection_range(g.graph.node_count())) kept.push_back(std::move(g));
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.graph.node_count() < b.graph.node_count();
  });
  return kept;
}

inline void write_stats_csv(const std::vector<GraphStats>& rows, std::ostream& os) {
  os << "graph,n,l_G,rho,d\n";
  for (const auto& r : rows) {
    std::ostringstream line;
    line.precision(6);
    line << std::fixed << r.name << ',' << r.n << ',' << r.mean_shortest_path << ','
         << r.density << ',' << r.dim;
    os << line.str() << '\n';
  }
}

}  // namespace garden::snap
