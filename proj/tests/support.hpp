#pragma once
// Fixtures and independent reference implementations shared by the test
// binaries. Nothing here calls into the library code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "garden/graph.hpp"
#include "garden/nn/parameters.hpp"

namespace testing_support {

using garden::AttributedGraph;
using garden::Edge;
using garden::NodeId;

inline AttributedGraph make_graph(std::size_t n, std::vector<Edge> edges, std::size_t dim = 1,
                                  std::vector<double> attrs = {}) {
  if (attrs.empty()) {
    attrs.resize(n * dim);
    for (std::size_t i = 0; i < attrs.size(); ++i) attrs[i] = static_cast<double>(i);
  }
  return AttributedGraph(n, dim, edges, std::move(attrs));
}

inline AttributedGraph path_graph(std::size_t n, std::size_t dim = 1) {
  std::vector<Edge> e;
  for (NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, e, dim);
}

inline AttributedGraph complete_graph(std::size_t n, std::size_t dim = 1) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return make_graph(n, e, dim);
}

inline AttributedGraph star_graph(std::size_t leaves) {
  std::vector<Edge> e;
  for (NodeId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return make_graph(leaves + 1, e);
}

inline AttributedGraph cycle_graph(std::size_t n) {
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i) e.emplace_back(i, static_cast<NodeId>((i + 1) % n));
  return make_graph(n, e);
}

// Erdos-Renyi G(n, p) with attributes uniform on [0,1]^dim, from std::mt19937.
inline AttributedGraph random_graph(std::size_t n, double p, std::uint32_t seed,
                                    std::size_t dim = 2) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> e;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (u(gen) < p) e.emplace_back(i, j);
  std::vector<double> attrs(n * dim);
  for (auto& a : attrs) a = u(gen);
  return AttributedGraph(n, dim, e, std::move(attrs));
}

// Random connected graph: a random spanning tree plus G(n, p) extras.
inline AttributedGraph random_connected_graph(std::size_t n, double p, std::uint32_t seed,
                                              std::size_t dim = 2) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> e;
  for (NodeId i = 1; i < n; ++i) {
    e.emplace_back(static_cast<NodeId>(gen() % i), i);
  }
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j)
      if (u(gen) < p) e.emplace_back(i, j);
  std::vector<double> attrs(n * dim);
  for (auto& a : attrs) a = u(gen);
  return AttributedGraph(n, dim, e, std::move(attrs));
}

constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

// All-pairs hop distances by Floyd-Warshall over an edge-list scan.
inline std::vector<std::vector<long long>> floyd_warshall(std::size_t n,
                                                          const std::vector<Edge>& edges) {
  std::vector<std::vector<long long>> d(n, std::vector<long long>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (auto [a, b] : edges) d[a][b] = d[b][a] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Brute-force metric references.
inline double ref_oracle_ratio(const std::vector<std::size_t>& len,
                               const std::vector<std::uint32_t>& oracle) {
  long double s = 0;
  for (std::size_t i = 0; i < len.size(); ++i) {
    s += static_cast<long double>(len[i]) / static_cast<long double>(oracle[i]);
  }
  return static_cast<double>(s / static_cast<long double>(len.size()));
}

inline double ref_trunc_rate(const std::vector<bool>& truncated) {
  std::size_t k = 0;
  for (bool t : truncated) k += t ? 1 : 0;
  return 100.0 * static_cast<double>(k) / static_cast<double>(truncated.size());
}

// Central finite difference of f with respect to scalar `x` (perturbed in place).
template <class F>
double central_difference(double& x, double h, F&& f) {
  const double saved = x;
  x = saved + h;
  const double up = f();
  x = saved - h;
  const double down = f();
  x = saved;
  return (up - down) / (2 * h);
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / scale;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::size_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("garden_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

  void write(const std::string& name, const std::string& content) const {
    std::ofstream(path_ / name) << content;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testing_support
