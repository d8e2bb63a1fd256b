#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "garden/error.hpp"
#include "garden/graph.hpp"
#include "garden/nn/parameters.hpp"
#include "garden/nn/tape.hpp"
#include "garden/rng.hpp"

namespace garden::nn {

enum class Activation { kLinear, kRelu, kElu };

inline const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
    case Activation::kElu: return "elu";
  }
  return "?";
}

inline Var activate(Tape& tape, Var x, Activation a) {
  switch (a) {
    case Activation::kRelu: return tape.relu(x);
    case Activation::kElu: return tape.elu(x);
    case Activation::kLinear: break;
  }
  return x;
}

struct DenseLayer {
  std::size_t weight = 0;  // out x in
  std::size_t bias = 0;    // out
  std::size_t in = 0;
  std::size_t out = 0;
};

inline DenseLayer make_dense(ParameterSet& params, const std::string& prefix, std::size_t in,
                             std::size_t out, Rng& rng) {
  DenseLayer layer{params.add(prefix + ".weight", out, in), params.add(prefix + ".bias", out, 1),
                   in, out};
  init_fan_in_uniform(params[layer.weight], in, rng);
  init_fan_in_uniform(params[layer.bias], in, rng);
  return layer;
}

// Dense layers with a hidden nonlinearity between them and a linear output.
struct Mlp {
  std::vector<DenseLayer> layers;
  Activation hidden = Activation::kRelu;

  std::size_t in_dim() const { return layers.front().in; }
  std::size_t out_dim() const { return layers.back().out; }
};

inline Mlp make_mlp(ParameterSet& params, const std::string& prefix, std::size_t in,
                    std::size_t hidden, std::size_t out, std::size_t depth, Rng& rng,
                    Activation activation = Activation::kRelu) {
  if (depth == 0) throw ContractError("MLP needs at least one layer");
  Mlp mlp;
  mlp.hidden = activation;
  std::size_t width = in;
  for (std::size_t i = 0; i < depth; ++i) {
    const std::size_t next = i + 1 == depth ? out : hidden;
    mlp.layers.push_back(make_dense(params, prefix + "." + std::to_string(i), width, next, rng));
    width = next;
  }
  return mlp;
}

inline Var mlp_forward(Tape& tape, const Mlp& mlp, Var input) {
  if (tape.size(input) != mlp.in_dim()) {
    throw ContractError("MLP input has width " + std::to_string(tape.size(input)) +
                        ", expected " + std::to_string(mlp.in_dim()));
  }
  Var h = input;
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    const auto& layer = mlp.layers[i];
    h = tape.affine(tape.param(layer.weight), h, tape.param(layer.bias));
    if (i + 1 < mlp.layers.size()) h = activate(tape, h, mlp.hidden);
  }
  return h;
}

inline double activate(double x, Activation a) {
  switch (a) {
    case Activation::kRelu: return x > 0 ? x : 0.0;
    case Activation::kElu: return x > 0 ? x : std::expm1(x);
    case Activation::kLinear: break;
  }
  return x;
}

// Evaluation without a tape. Same summation order as Tape::affine, so the
// result is bit-identical to the recorded forward pass.
inline std::vector<double> mlp_forward(const ParameterSet& params, const Mlp& mlp,
                                       std::span<const double> input) {
  if (input.size() != mlp.in_dim()) throw ContractError("MLP input width mismatch");
  std::vector<double> h(input.begin(), input.end()), next;
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    const auto& layer = mlp.layers[i];
    const double* w = params[layer.weight].value.data();
    const double* b = params[layer.bias].value.data();
    next.assign(layer.out, 0.0);
    for (std::size_t r = 0; r < layer.out; ++r) {
      double s = b[r];
      const double* row = w + r * layer.in;
      for (std::size_t c = 0; c < layer.in; ++c) s += row[c] * h[c];
      next[r] = i + 1 < mlp.layers.size() ? activate(s, mlp.hidden) : s;
    }
    h.swap(next);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Single-head graph attention.

struct GatLayer {
  std::size_t weight = 0;         // out x in
  std::size_t attn_receiver = 0;  // out; first half of the attention vector
  std::size_t attn_sender = 0;    // out; second half
  std::size_t bias = 0;           // out
  std::size_t in = 0;
  std::size_t out = 0;
};

struct GatStack {
  std::vector<GatLayer> layers;
  Activation activation = Activation::kElu;
  double negative_slope = 0.2;

  std::size_t in_dim() const { return layers.front().in; }
  std::size_t out_dim() const { return layers.back().out; }
};

inline GatStack make_gat(ParameterSet& params, const std::string& prefix, std::size_t in,
                         std::size_t width, std::size_t depth, Rng& rng) {
  if (depth == 0) throw ContractError("GAT needs at least one layer");
  GatStack stack;
  std::size_t cur = in;
  for (std::size_t i = 0; i < depth; ++i) {
    const std::string p = prefix + "." + std::to_string(i);
    GatLayer layer;
    layer.weight = params.add(p + ".weight", width, cur);
    layer.attn_receiver = params.add(p + ".attn_receiver", width, 1);
    layer.attn_sender = params.add(p + ".attn_sender", width, 1);
    layer.bias = params.add(p + ".bias", width, 1);
    layer.in = cur;
    layer.out = width;
    init_fan_in_uniform(params[layer.weight], cur, rng);
    init_fan_in_uniform(params[layer.attn_receiver], width, rng);
    init_fan_in_uniform(params[layer.attn_sender], width, rng);
    stack.layers.push_back(layer);
    cur = width;
  }
  return stack;
}

// An ego graph in local coordinates: member i has feature row i and a list of
// local neighbor indices (within the ego graph, excluding i itself).
struct LocalEgo {
  std::size_t center = 0;
  std::size_t feature_dim = 0;
  std::vector<double> features;  // members x feature_dim
  std::vector<std::vector<std::size_t>> adjacency;

  std::size_t member_count() const { return adjacency.size(); }
};

// Input features are [x_w || 1{w = center}].
inline LocalEgo localize(const AttributedGraph& g, const EgoGraph& ego) {
  LocalEgo local;
  const std::size_t d = g.attribute_dim();
  local.feature_dim = d + 1;
  local.adjacency.resize(ego.members.size());
  auto index_of = [&](NodeId u) {
    return static_cast<std::size_t>(
        std::lower_bound(ego.members.begin(), ego.members.end(), u) - ego.members.begin());
  };
  for (std::size_t i = 0; i < ego.members.size(); ++i) {
    auto row = g.attributes(ego.members[i]);
    local.features.insert(local.features.end(), row.begin(), row.end());
    local.features.push_back(ego.members[i] == ego.center ? 1.0 : 0.0);
    if (ego.members[i] == ego.center) local.center = i;
  }
  for (auto [a, b] : ego.edges) {
    const auto ia = index_of(a), ib = index_of(b);
    local.adjacency[ia].push_back(ib);
    local.adjacency[ib].push_back(ia);
  }
  return local;
}

// Embedding of the ego center after message passing restricted to the ego
// graph at every layer. Attention for member i runs over its ego neighbors
// plus i itself.
inline Var gat_embed(Tape& tape, const GatStack& stack, const LocalEgo& ego) {
  const std::size_t k = ego.member_count();
  if (ego.feature_dim != stack.in_dim()) {
    throw ContractError("GAT input width " + std::to_string(ego.feature_dim) + ", expected " +
                        std::to_string(stack.in_dim()));
  }
  std::vector<Var> h(k);
  for (std::size_t i = 0; i < k; ++i) {
    h[i] = tape.constant(std::span<const double>(ego.features.data() + i * ego.feature_dim,
                                                 ego.feature_dim));
  }
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    const auto& layer = stack.layers[l];
    const bool last = l + 1 == stack.layers.size();
    Var w = tape.param(layer.weight);
    Var a_recv = tape.param(layer.attn_receiver);
    Var a_send = tape.param(layer.attn_sender);
    Var bias = tape.param(layer.bias);

    std::vector<Var> z(k), recv(k), send(k);
    for (std::size_t i = 0; i < k; ++i) {
      z[i] = tape.affine(w, h[i]);
      recv[i] = tape.dot(a_recv, z[i]);
      send[i] = tape.dot(a_send, z[i]);
    }
    std::vector<Var> next(k);
    for (std::size_t i = 0; i < k; ++i) {
      // Only the center survives the final layer.
      if (last && i != ego.center) continue;
      std::vector<Var> scores, values;
      scores.reserve(ego.adjacency[i].size() + 1);
      values.reserve(ego.adjacency[i].size() + 1);
      scores.push_back(tape.leaky_relu(tape.add(recv[i], send[i]), stack.negative_slope));
      values.push_back(z[i]);
      for (std::size_t j : ego.adjacency[i]) {
        scores.push_back(tape.leaky_relu(tape.add(recv[i], send[j]), stack.negative_slope));
        values.push_back(z[j]);
      }
      Var alpha = tape.softmax(tape.stack(scores));
      next[i] = activate(tape, tape.add(tape.weighted_sum(alpha, values), bias), stack.activation);
    }
    h = std::move(next);
  }
  return h[ego.center];
}

inline Var gat_embed_ego(Tape& tape, const GatStack& stack, const AttributedGraph& g,
                         const EgoGraph& ego) {
  return gat_embed(tape, stack, localize(g, ego));
}

}  // namespace garden::nn
