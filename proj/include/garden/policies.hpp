#pragma once
// Action selection: four heuristic walkers and the learned actor-critic over
// raw, degree-augmented or attention-embedded node features.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "garden/error.hpp"
#include "garden/graph.hpp"
#include "garden/nn/checkpoint.hpp"
#include "garden/nn/layers.hpp"
#include "garden/nn/parameters.hpp"
#include "garden/nn/tape.hpp"
#include "garden/rng.hpp"
#include "garden/synth.hpp"

namespace garden {

struct ActionDistribution {
  std::vector<NodeId> neighbors;     // same order as AttributedGraph::neighbors
  std::vector<double> probabilities;

  // Inverse-CDF draw with one uniform.
  NodeId sample(Rng& rng) const {
    const double u = rng.uniform();
    double acc = 0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
      acc += probabilities[i];
      if (u < acc) return neighbors[i];
    }
    return neighbors.back();
  }

  // Most likely neighbor; lowest id on ties.
  NodeId argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probabilities.size(); ++i) {
      if (probabilities[i] > probabilities[best]) best = i;
    }
    return neighbors[best];
  }

  double entropy() const {
    double h = 0;
    for (double p : probabilities) {
      if (p > 0) h -= p * std::log(p);
    }
    return h;
  }
};

inline ActionDistribution softmax_distribution(std::span<const NodeId> neighbors,
                                               std::span<const double> logits) {
  ActionDistribution dist;
  dist.neighbors.assign(neighbors.begin(), neighbors.end());
  const double mx = *std::max_element(logits.begin(), logits.end());
  dist.probabilities.resize(logits.size());
  double z = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    z += dist.probabilities[i] = std::exp(logits[i] - mx);
  }
  for (auto& p : dist.probabilities) p /= z;
  return dist;
}

namespace detail {

inline std::span<const NodeId> require_neighbors(const AttributedGraph& g, NodeId holder) {
  auto nbrs = g.neighbors(holder);
  if (nbrs.empty()) {
    throw InputError("node " + std::to_string(holder) + " has no neighbors (dead end)");
  }
  return nbrs;
}

inline void require_temperature(double tau) {
  if (!(tau > 0)) throw InputError("temperature must be positive");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Heuristic walkers

// Neighbor closest to the target in attribute space; lowest id on ties.
inline NodeId greedy_walker(const AttributedGraph& g, NodeId holder,
                            std::span<const double> target_attrs) {
  auto nbrs = detail::require_neighbors(g, holder);
  NodeId best = nbrs[0];
  double best_d = synth::euclidean(g.attributes(best), target_attrs);
  for (std::size_t i = 1; i < nbrs.size(); ++i) {
    const double d = synth::euclidean(g.attributes(nbrs[i]), target_attrs);
    if (d < best_d) {
      best_d = d;
      best = nbrs[i];
    }
  }
  return best;
}

// p(v) proportional to exp(-||x_v - x_tgt|| / tau).
inline ActionDistribution distance_walker(const AttributedGraph& g, NodeId holder,
                                          std::span<const double> target_attrs, double tau) {
  detail::require_temperature(tau);
  auto nbrs = detail::require_neighbors(g, holder);
  std::vector<double> logits(nbrs.size());
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    logits[i] = -synth::euclidean(g.attributes(nbrs[i]), target_attrs) / tau;
  }
  return softmax_distribution(nbrs, logits);
}

// p(v) proportional to exp(deg(v) / tau).
inline ActionDistribution connection_walker(const AttributedGraph& g, NodeId holder, double tau) {
  detail::require_temperature(tau);
  auto nbrs = detail::require_neighbors(g, holder);
  std::vector<double> logits(nbrs.size());
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    logits[i] = static_cast<double>(g.degree(nbrs[i])) / tau;
  }
  return softmax_distribution(nbrs, logits);
}

inline ActionDistribution random_walker_distribution(const AttributedGraph& g, NodeId holder) {
  auto nbrs = detail::require_neighbors(g, holder);
  ActionDistribution dist;
  dist.neighbors.assign(nbrs.begin(), nbrs.end());
  dist.probabilities.assign(nbrs.size(), 1.0 / static_cast<double>(nbrs.size()));
  return dist;
}

inline NodeId random_walker(const AttributedGraph& g, NodeId holder, Rng& rng) {
  auto nbrs = detail::require_neighbors(g, holder);
  return nbrs[rng.below(nbrs.size())];
}

// ---------------------------------------------------------------------------
// Uniform interface used by evaluation. A Policy is frozen and shareable
// across threads; begin_episode() hands out an episode-scoped Actor.

class Actor {
 public:
  virtual ~Actor() = default;
  virtual ActionDistribution distribution(NodeId holder) = 0;
  virtual NodeId act(NodeId holder, Rng& rng) { return distribution(holder).sample(rng); }
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual std::string feature_mode() const { return "-"; }
  // NaN when the policy has no temperature.
  virtual double temperature() const { return std::numeric_limits<double>::quiet_NaN(); }
  virtual std::unique_ptr<Actor> begin_episode(NodeId target) const = 0;

  // Salt mixed into the per-episode random stream; lets two copies of one
  // policy run on independent streams.
  std::uint64_t stream_salt = 0;
};

enum class WalkerKind { kGreedy, kDistance, kConnection, kRandom };

inline const char* walker_name(WalkerKind k) {
  switch (k) {
    case WalkerKind::kGreedy: return "GreedyWalker";
    case WalkerKind::kDistance: return "DistanceWalker";
    case WalkerKind::kConnection: return "ConnectionWalker";
    case WalkerKind::kRandom: return "RandomWalker";
  }
  return "?";
}

inline std::optional<WalkerKind> parse_walker(const std::string& s) {
  for (auto k : {WalkerKind::kGreedy, WalkerKind::kDistance, WalkerKind::kConnection,
                 WalkerKind::kRandom}) {
    std::string full = walker_name(k);
    std::string shortname = full.substr(0, full.size() - 6);
    std::string lower;
    for (char c : shortname) lower.push_back(static_cast<char>(std::tolower(c)));
    if (s == full || s == shortname || s == lower) return k;
  }
  return std::nullopt;
}

class WalkerPolicy final : public Policy {
 public:
  WalkerPolicy(const AttributedGraph& g, WalkerKind kind, double tau = 1.0)
      : g_(&g), kind_(kind), tau_(tau) {
    if (kind == WalkerKind::kDistance || kind == WalkerKind::kConnection) {
      detail::require_temperature(tau);
    }
  }

  std::string name() const override { return walker_name(kind_); }
  WalkerKind kind() const { return kind_; }

  double temperature() const override {
    if (kind_ == WalkerKind::kDistance || kind_ == WalkerKind::kConnection) return tau_;
    return Policy::temperature();
  }

  std::unique_ptr<Actor> begin_episode(NodeId target) const override {
    return std::make_unique<WalkerActor>(*g_, kind_, tau_, target);
  }

 private:
  class WalkerActor final : public Actor {
   public:
    WalkerActor(const AttributedGraph& g, WalkerKind kind, double tau, NodeId target)
        : g_(g), kind_(kind), tau_(tau), target_attrs_(g.attributes(target)) {}

    ActionDistribution distribution(NodeId holder) override {
      switch (kind_) {
        case WalkerKind::kGreedy: {
          const NodeId pick = greedy_walker(g_, holder, target_attrs_);
          ActionDistribution dist = random_walker_distribution(g_, holder);
          for (std::size_t i = 0; i < dist.neighbors.size(); ++i) {
            dist.probabilities[i] = dist.neighbors[i] == pick ? 1.0 : 0.0;
          }
          return dist;
        }
        case WalkerKind::kDistance: return distance_walker(g_, holder, target_attrs_, tau_);
        case WalkerKind::kConnection: return connection_walker(g_, holder, tau_);
        case WalkerKind::kRandom: break;
      }
      return random_walker_distribution(g_, holder);
    }

    NodeId act(NodeId holder, Rng& rng) override {
      switch (kind_) {
        case WalkerKind::kGreedy: return greedy_walker(g_, holder, target_attrs_);
        case WalkerKind::kRandom: return random_walker(g_, holder, rng);
        default: return distribution(holder).sample(rng);
      }
    }

   private:
    const AttributedGraph& g_;
    WalkerKind kind_;
    double tau_;
    std::span<const double> target_attrs_;
  };

  const AttributedGraph* g_;
  WalkerKind kind_;
  double tau_;
};

// ---------------------------------------------------------------------------
// Learned actor-critic

enum class FeatureMode { kRaw, kWithDegree, kGat };

inline const char* feature_mode_name(FeatureMode m) {
  switch (m) {
    case FeatureMode::kRaw: return "raw";
    case FeatureMode::kWithDegree: return "with_degree";
    case FeatureMode::kGat: return "gat";
  }
  return "?";
}

inline const char* model_name(FeatureMode m) {
  switch (m) {
    case FeatureMode::kRaw: return "MLPA2C";
    case FeatureMode::kWithDegree: return "MLPA2CWD";
    case FeatureMode::kGat: return "GARDEN";
  }
  return "?";
}

inline std::optional<FeatureMode> parse_feature_mode(const std::string& s) {
  for (auto m : {FeatureMode::kRaw, FeatureMode::kWithDegree, FeatureMode::kGat}) {
    if (s == feature_mode_name(m) || s == model_name(m)) return m;
  }
  if (s == "wd" || s == "mlpa2cwd") return FeatureMode::kWithDegree;
  if (s == "mlpa2c") return FeatureMode::kRaw;
  if (s == "garden") return FeatureMode::kGat;
  return std::nullopt;
}

struct ModelConfig {
  FeatureMode mode = FeatureMode::kGat;
  std::size_t hidden = 64;
  std::size_t mlp_layers = 3;
  std::size_t gat_width = 64;
  std::size_t gat_layers = 3;
  nn::Activation mlp_activation = nn::Activation::kRelu;
  nn::Activation gat_activation = nn::Activation::kElu;
  double gat_negative_slope = 0.2;
  std::uint64_t init_seed = 0;

  nlohmann::json to_json() const {
    return {{"feature_mode", feature_mode_name(mode)},
            {"hidden", hidden},
            {"mlp_layers", mlp_layers},
            {"gat_width", gat_width},
            {"gat_layers", gat_layers},
            {"gat_heads", 1},
            {"mlp_activation", nn::activation_name(mlp_activation)},
            {"gat_activation", nn::activation_name(gat_activation)},
            {"gat_negative_slope", gat_negative_slope},
            {"init_seed", init_seed}};
  }

  static ModelConfig from_json(const nlohmann::json& j) {
    auto activation = [](const std::string& s) {
      for (auto a : {nn::Activation::kLinear, nn::Activation::kRelu, nn::Activation::kElu}) {
        if (s == nn::activation_name(a)) return a;
      }
      throw SchemaError("unknown activation " + s);
    };
    ModelConfig c;
    auto mode = parse_feature_mode(j.at("feature_mode").get<std::string>());
    if (!mode) throw SchemaError("unknown feature mode in checkpoint");
    c.mode = *mode;
    c.hidden = j.at("hidden");
    c.mlp_layers = j.at("mlp_layers");
    c.gat_width = j.at("gat_width");
    c.gat_layers = j.at("gat_layers");
    c.mlp_activation = activation(j.at("mlp_activation"));
    c.gat_activation = activation(j.at("gat_activation"));
    c.gat_negative_slope = j.at("gat_negative_slope");
    c.init_seed = j.at("init_seed");
    return c;
  }
};

// Policy network f_pi, value network f_v and, in GAT mode, the representation
// network. All tensors live in one ParameterSet.
class ActorCritic {
 public:
  ActorCritic(ModelConfig config, std::size_t attribute_dim)
      : config_(config), attribute_dim_(attribute_dim) {
    Rng rng(config.init_seed);
    if (config.mode == FeatureMode::kGat) {
      gat_ = nn::make_gat(params_, "rep", attribute_dim + 1, config.gat_width, config.gat_layers,
                          rng);
      gat_->activation = config.gat_activation;
      gat_->negative_slope = config.gat_negative_slope;
    }
    const std::size_t in = feature_dim() + message_dim();
    policy_ = nn::make_mlp(params_, "policy", in, config.hidden, 1, config.mlp_layers, rng,
                           config.mlp_activation);
    value_ = nn::make_mlp(params_, "value", in, config.hidden, 1, config.mlp_layers, rng,
                          config.mlp_activation);
  }

  const ModelConfig& config() const noexcept { return config_; }
  FeatureMode mode() const noexcept { return config_.mode; }
  std::size_t attribute_dim() const noexcept { return attribute_dim_; }
  std::string name() const { return model_name(config_.mode); }

  std::size_t feature_dim() const {
    switch (config_.mode) {
      case FeatureMode::kRaw: return attribute_dim_;
      case FeatureMode::kWithDegree: return attribute_dim_ + 1;
      case FeatureMode::kGat: return config_.gat_width;
    }
    return 0;
  }

  // Raw target attributes, except in GAT mode where the message is the
  // target's embedding.
  std::size_t message_dim() const {
    return config_.mode == FeatureMode::kGat ? config_.gat_width : attribute_dim_;
  }

  nn::ParameterSet& params() noexcept { return params_; }
  const nn::ParameterSet& params() const noexcept { return params_; }
  const nn::Mlp& policy_net() const noexcept { return policy_; }
  const nn::Mlp& value_net() const noexcept { return value_; }
  const std::optional<nn::GatStack>& gat() const noexcept { return gat_; }

  nlohmann::json sidecar() const {
    return {{"model", config_.to_json()}, {"attribute_dim", attribute_dim_}};
  }

  void save(const std::string& path, nlohmann::json extra = nlohmann::json::object()) const {
    auto side = sidecar();
    for (auto& [k, v] : extra.items()) side[k] = v;
    nn::save_checkpoint(path, params_, side);
  }

  static ActorCritic load(const std::string& path) {
    auto ck = nn::load_checkpoint(path);
    ActorCritic model(ModelConfig::from_json(ck.sidecar.at("model")),
                      ck.sidecar.at("attribute_dim").get<std::size_t>());
    nn::assign_parameters(model.params_, ck.params);
    return model;
  }

 private:
  ModelConfig config_;
  std::size_t attribute_dim_;
  nn::ParameterSet params_;
  std::optional<nn::GatStack> gat_;
  nn::Mlp policy_;
  nn::Mlp value_;
};

// Node features and message on a tape, computed lazily and memoized so each
// node contributes one subgraph per tape.
class TapeFeatures {
 public:
  TapeFeatures(nn::Tape& tape, const ActorCritic& model, const AttributedGraph& g)
      : tape_(tape), model_(model), g_(g), cache_(g.node_count()) {}

  nn::Var feature(NodeId u) {
    g_.check(u);
    if (cache_[u].valid()) return cache_[u];
    nn::Var v;
    switch (model_.mode()) {
      case FeatureMode::kRaw: v = tape_.constant(g_.attributes(u)); break;
      case FeatureMode::kWithDegree: {
        auto x = g_.attributes(u);
        std::vector<double> row(x.begin(), x.end());
        row.push_back(static_cast<double>(g_.degree(u)));
        v = tape_.constant(std::move(row));
        break;
      }
      case FeatureMode::kGat: v = nn::gat_embed_ego(tape_, *model_.gat(), g_, ego_graph(g_, u)); break;
    }
    return cache_[u] = v;
  }

  nn::Var message(NodeId target) {
    if (model_.mode() == FeatureMode::kGat) return feature(target);
    if (!message_.valid() || message_target_ != target) {
      message_ = tape_.constant(g_.attributes(target));
      message_target_ = target;
    }
    return message_;
  }

 private:
  nn::Tape& tape_;
  const ActorCritic& model_;
  const AttributedGraph& g_;
  std::vector<nn::Var> cache_;
  nn::Var message_;
  NodeId message_target_ = 0;
};

// Logits f_pi([x_j || m]) for every neighbor j of holder, stacked in neighbor order.
inline nn::Var policy_logits(nn::Tape& tape, const ActorCritic& model, TapeFeatures& features,
                             const AttributedGraph& g, NodeId holder, nn::Var message) {
  auto nbrs = detail::require_neighbors(g, holder);
  std::vector<nn::Var> logits;
  logits.reserve(nbrs.size());
  for (NodeId j : nbrs) {
    nn::Var in = tape.concat(features.feature(j), message);
    logits.push_back(nn::mlp_forward(tape, model.policy_net(), in));
  }
  return tape.stack(logits);
}

inline nn::Var value_on_tape(nn::Tape& tape, const ActorCritic& model, nn::Var holder_feature,
                             nn::Var message) {
  return nn::mlp_forward(tape, model.value_net(), tape.concat(holder_feature, message));
}

// Per-node features evaluated with frozen parameters.
using FeatureTable = std::vector<std::vector<double>>;

inline std::vector<double> node_feature(const ActorCritic& model, const AttributedGraph& g,
                                        NodeId u) {
  nn::Tape tape(model.params());
  TapeFeatures features(tape, model, g);
  auto v = tape.value(features.feature(u));
  return {v.begin(), v.end()};
}

inline FeatureTable compute_feature_table(const ActorCritic& model, const AttributedGraph& g) {
  FeatureTable table(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) table[u] = node_feature(model, g, u);
  return table;
}

inline std::vector<double> message_vector(const ActorCritic& model, const AttributedGraph& g,
                                          NodeId target, const FeatureTable* table = nullptr) {
  if (model.mode() == FeatureMode::kGat) {
    return table ? (*table)[target] : node_feature(model, g, target);
  }
  auto x = g.attributes(target);
  return {x.begin(), x.end()};
}

inline double policy_logit(const ActorCritic& model, std::span<const double> neighbor_feature,
                           std::span<const double> message) {
  std::vector<double> in(neighbor_feature.begin(), neighbor_feature.end());
  in.insert(in.end(), message.begin(), message.end());
  return nn::mlp_forward(model.params(), model.policy_net(), in)[0];
}

// softmax over neighbors of f_pi([x_j || m]).
inline ActionDistribution learned_policy(const ActorCritic& model, const AttributedGraph& g,
                                         NodeId holder, const FeatureTable& features,
                                         std::span<const double> message) {
  auto nbrs = detail::require_neighbors(g, holder);
  std::vector<double> logits(nbrs.size());
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    if (features.at(nbrs[i]).size() != model.feature_dim()) {
      throw ContractError("missing feature for node " + std::to_string(nbrs[i]));
    }
    logits[i] = policy_logit(model, features[nbrs[i]], message);
  }
  return softmax_distribution(nbrs, logits);
}

// v = f_v([x_holder || m]).
inline double value_estimate(const ActorCritic& model, std::span<const double> holder_feature,
                             std::span<const double> message) {
  if (holder_feature.size() + message.size() != model.value_net().in_dim()) {
    throw ContractError("value network input width mismatch");
  }
  std::vector<double> in(holder_feature.begin(), holder_feature.end());
  in.insert(in.end(), message.begin(), message.end());
  return nn::mlp_forward(model.params(), model.value_net(), in)[0];
}

// Frozen learned policy. With a shared feature table (precompute = true)
// embeddings are computed once; otherwise each episode computes the features
// it touches. Logits are memoized per episode since they depend only on
// (neighbor, target).
class LearnedPolicy final : public Policy {
 public:
  LearnedPolicy(std::shared_ptr<const ActorCritic> model, const AttributedGraph& g,
                bool precompute = true, bool memoize_logits = true)
      : model_(std::move(model)), g_(&g), memoize_(memoize_logits) {
    if (precompute) table_ = std::make_shared<const FeatureTable>(compute_feature_table(*model_, g));
  }

  std::string name() const override { return model_->name(); }
  std::string feature_mode() const override { return feature_mode_name(model_->mode()); }
  const ActorCritic& model() const { return *model_; }

  std::unique_ptr<Actor> begin_episode(NodeId target) const override {
    return std::make_unique<LearnedActor>(*this, target);
  }

 private:
  class LearnedActor final : public Actor {
   public:
    LearnedActor(const LearnedPolicy& p, NodeId target)
        : p_(p), lazy_(p.table_ ? 0 : p.g_->node_count()), logits_(p.g_->node_count()) {
      message_ = message_vector(*p.model_, *p.g_, target, p.table_.get());
    }

    ActionDistribution distribution(NodeId holder) override {
      auto nbrs = detail::require_neighbors(*p_.g_, holder);
      std::vector<double> logits(nbrs.size());
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        const NodeId j = nbrs[i];
        if (p_.memoize_ && logits_[j]) {
          logits[i] = *logits_[j];
          continue;
        }
        logits[i] = policy_logit(*p_.model_, feature(j), message_);
        if (p_.memoize_) logits_[j] = logits[i];
      }
      return softmax_distribution(nbrs, logits);
    }

   private:
    const std::vector<double>& feature(NodeId u) {
      if (p_.table_) return (*p_.table_)[u];
      if (lazy_[u].empty()) lazy_[u] = node_feature(*p_.model_, *p_.g_, u);
      return lazy_[u];
    }

    const LearnedPolicy& p_;
    FeatureTable lazy_;
    std::vector<std::optional<double>> logits_;
    std::vector<double> message_;
  };

  std::shared_ptr<const ActorCritic> model_;
  const AttributedGraph* g_;
  std::shared_ptr<const FeatureTable> table_;
  bool memoize_;
};

}  // namespace garden
