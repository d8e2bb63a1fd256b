#pragma once
// Episodic advantage actor-critic with entropy regularization, one gradient
// step per episode, periodic validation and early stopping; plus the
// temperature search for the stochastic walkers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "garden/env.hpp"
#include "garden/error.hpp"
#include "garden/eval.hpp"
#include "garden/graph.hpp"
#include "garden/nn/adam.hpp"
#include "garden/nn/tape.hpp"
#include "garden/policies.hpp"
#include "garden/rng.hpp"

namespace garden::train {

struct TrainConfig {
  std::size_t episodes = 200'000;
  std::size_t eval_every = 100;
  double gamma = 0.99;
  double entropy_coef = 1e-3;
  std::size_t max_steps = kDefaultMaxSteps;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::size_t patience = 50;  // evaluations without improvement
  double log_prob_floor = -30.0;
  std::size_t jobs = 1;       // validation workers
  ModelConfig model;

  void validate() const {
    if (!(gamma > 0 && gamma <= 1)) throw ConfigError("gamma must lie in (0, 1]");
    if (!(entropy_coef >= 0)) throw ConfigError("entropy coefficient must be non-negative");
    if (max_steps == 0) throw ConfigError("max_steps must be positive");
    if (eval_every == 0) throw ConfigError("eval_every must be positive");
    if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
  }

  nlohmann::json to_json() const {
    return {{"episodes", episodes},
            {"eval_every", eval_every},
            {"gamma", gamma},
            {"entropy_coef", entropy_coef},
            {"max_steps", max_steps},
            {"learning_rate", learning_rate},
            {"adam", {{"beta1", 0.9}, {"beta2", 0.999}, {"epsilon", 1e-8}}},
            {"seed", seed},
            {"patience", patience},
            {"log_prob_floor", log_prob_floor},
            {"truncation_bootstrap", "stopgrad(v_next)"},
            {"terminal_bootstrap", 0},
            {"entropy_sign", "loss subtracts lambda * (-sum p log p)"},
            {"model", model.to_json()}};
  }
};

struct StepRecord {
  Transition transition;
  std::size_t action_index = 0;           // position of `to` among neighbors(from)
  std::vector<double> probabilities;      // distribution the action was drawn from
};

struct EpisodeBuffer {
  NodeId source = 0;
  NodeId target = 0;
  std::vector<StepRecord> steps;

  bool delivered() const { return !steps.empty() && steps.back().transition.terminal; }
  double episode_return() const {
    double r = 0;
    for (const auto& s : steps) r += s.transition.reward;
    return r;
  }
};

// Samples actions from the current policy until delivery or truncation.
inline EpisodeBuffer rollout(const AttributedGraph& g, const ActorCritic& model, NodeId src,
                             NodeId tgt, std::size_t max_steps, Rng& rng) {
  // Non-owning handle; the policy lives only for this call.
  std::shared_ptr<const ActorCritic> handle(std::shared_ptr<const ActorCritic>{}, &model);
  LearnedPolicy policy(handle, g, /*precompute=*/false);
  auto actor = policy.begin_episode(tgt);
  EpisodeBuffer buf{src, tgt, {}};
  EpisodeState s = reset(g, src, tgt, max_steps);
  while (s.running()) {
    auto dist = actor->distribution(s.holder);
    const NodeId a = dist.sample(rng);
    auto [next, tr] = step(g, s, a);
    const auto it = std::find(dist.neighbors.begin(), dist.neighbors.end(), a);
    buf.steps.push_back({tr, static_cast<std::size_t>(it - dist.neighbors.begin()),
                         std::move(dist.probabilities)});
    s = next;
  }
  return buf;
}

// A = r + gamma * (terminal ? 0 : v_next) - v_curr.
inline double advantage(double reward, double v_next, double v_curr, bool terminal,
                        double gamma) {
  return reward + (terminal ? 0.0 : gamma * v_next) - v_curr;
}

struct EpisodeLoss {
  nn::Var total;
  double policy_loss = 0;
  double value_loss = 0;
  double entropy_sum = 0;
  std::size_t clamped_log_probs = 0;
};

// Summed episodic loss on `tape`:
//   A_t   = r_t + gamma * stopgrad(v(u')) * [not terminal] - v(u)
//   L_pi  = -stopgrad(A_t) * log pi(u' | u) - lambda * H(pi(. | u)),  H = -sum p log p
//   L_v   = A_t^2
inline EpisodeLoss episode_loss(nn::Tape& tape, const ActorCritic& model,
                                const AttributedGraph& g, const EpisodeBuffer& buf,
                                const TrainConfig& cfg) {
  if (buf.steps.empty()) throw ContractError("episode buffer is empty");
  TapeFeatures features(tape, model, g);
  const nn::Var message = features.message(buf.target);

  std::vector<nn::Var> value_cache(g.node_count());
  auto value_of = [&](NodeId u) {
    if (!value_cache[u].valid()) {
      value_cache[u] = value_on_tape(tape, model, features.feature(u), message);
    }
    return value_cache[u];
  };
  struct PolicyHead {
    nn::Var log_probs;
    nn::Var entropy;
  };
  std::vector<std::optional<PolicyHead>> head_cache(g.node_count());
  auto head_of = [&](NodeId u) -> const PolicyHead& {
    if (!head_cache[u]) {
      nn::Var logits = policy_logits(tape, model, features, g, u, message);
      nn::Var logp = tape.log_softmax(logits);
      nn::Var entropy = tape.neg(tape.sum(tape.mul(tape.exp(logp), logp)));
      head_cache[u] = PolicyHead{logp, entropy};
    }
    return *head_cache[u];
  };

  EpisodeLoss out;
  std::vector<nn::Var> terms;
  terms.reserve(2 * buf.steps.size());
  for (const auto& rec : buf.steps) {
    const auto& tr = rec.transition;
    const nn::Var v_curr = value_of(tr.from);
    nn::Var target = tape.scalar_constant(tr.reward);
    if (!tr.terminal) {
      target = tape.add(target, tape.scale(tape.stop_gradient(value_of(tr.to)), cfg.gamma));
    }
    const nn::Var adv = tape.sub(target, v_curr);
    const double adv_value = tape.scalar(adv);

    const auto& head = head_of(tr.from);
    nn::Var logp = tape.element(head.log_probs, rec.action_index);
    if (tape.scalar(logp) < cfg.log_prob_floor) {
      logp = tape.scalar_constant(cfg.log_prob_floor);
      ++out.clamped_log_probs;
    }
    const nn::Var policy_term =
        tape.sub(tape.scale(logp, -adv_value), tape.scale(head.entropy, cfg.entropy_coef));
    const nn::Var value_term = tape.square(adv);
    terms.push_back(policy_term);
    terms.push_back(value_term);
    out.policy_loss += tape.scalar(policy_term);
    out.value_loss += tape.scalar(value_term);
    out.entropy_sum += tape.scalar(head.entropy);
  }
  out.total = tape.add_all(terms);
  return out;
}

struct CurveRow {
  std::size_t episode = 0;
  double train_return = 0;     // mean undiscounted return since the previous row
  double val_oracle_ratio = 0;
  double val_trunc_rate = 0;
  double entropy_mean = 0;     // mean policy entropy per step since the previous row
};

struct TrainResult {
  ActorCritic best;
  ActorCritic last;
  std::vector<CurveRow> curve;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t best_episode = 0;
  std::size_t episodes_run = 0;
  bool stopped_early = false;
  bool diverged = false;
  std::string divergence;
};

constexpr std::uint64_t kValidationStream = 0x76616c6964ULL;

inline MetricsReport validate_model(const AttributedGraph& g, const ActorCritic& model,
                                    const PairSet& pairs, std::span<const std::uint32_t> oracle,
                                    const TrainConfig& cfg) {
  std::shared_ptr<const ActorCritic> handle(std::shared_ptr<const ActorCritic>{}, &model);
  LearnedPolicy policy(handle, g, /*precompute=*/true);
  EvalOptions opt;
  opt.max_steps = cfg.max_steps;
  opt.seed = derive_seed(cfg.seed, kValidationStream);
  opt.jobs = cfg.jobs;
  return rollout_policy(g, policy, pairs, oracle, opt);
}

using ProgressFn = std::function<void(const CurveRow&)>;

// Training targets are drawn from `train_targets`; sources uniformly from all
// nodes. Validation uses the fixed pair set.
inline TrainResult train(const AttributedGraph& g, std::span<const NodeId> train_targets,
                         const PairSet& val_pairs, const TrainConfig& cfg,
                         const ProgressFn& progress = {}) {
  cfg.validate();
  if (train_targets.empty()) throw ConfigError("no training targets");
  if (g.node_count() < 2) throw ConfigError("training needs at least two nodes");
  if (val_pairs.size() == 0) throw ConfigError("validation pair set is empty");

  ModelConfig mc = cfg.model;
  mc.init_seed = derive_seed(cfg.seed, 1);
  ActorCritic model(mc, g.attribute_dim());
  TrainResult result{model, model, {}, std::numeric_limits<double>::infinity(), 0, 0, false,
                     false, {}};
  const auto oracle = oracle_lengths(g, val_pairs);
  const nn::AdamConfig adam{cfg.learning_rate};
  Rng rng(derive_seed(cfg.seed, 2));

  double window_return = 0, window_entropy = 0;
  std::size_t window_episodes = 0, window_steps = 0, stale = 0;

  auto run_validation = [&](std::size_t episode) {
    const auto rep = validate_model(g, model, val_pairs, oracle, cfg);
    CurveRow row{episode,
                 window_episodes ? window_return / static_cast<double>(window_episodes) : 0.0,
                 rep.oracle_ratio.mean, rep.trunc_rate,
                 window_steps ? window_entropy / static_cast<double>(window_steps) : 0.0};
    result.curve.push_back(row);
    if (progress) progress(row);
    window_return = window_entropy = 0;
    window_episodes = window_steps = 0;
    if (rep.oracle_ratio.mean < result.best_val) {
      result.best_val = rep.oracle_ratio.mean;
      result.best_episode = episode;
      result.best = model;
      stale = 0;
    } else {
      ++stale;
    }
  };

  for (std::size_t ep = 1; ep <= cfg.episodes; ++ep) {
    const NodeId tgt = train_targets[rng.below(train_targets.size())];
    NodeId src;
    do {
      src = static_cast<NodeId>(rng.below(g.node_count()));
    } while (src == tgt);
    const auto buf = rollout(g, model, src, tgt, cfg.max_steps, rng);

    nn::Tape tape(model.params());
    const auto loss = episode_loss(tape, model, g, buf, cfg);
    const double total = tape.scalar(loss.total);
    try {
      if (!std::isfinite(total)) throw TrainingError("non-finite episode loss");
      model.params().zero_grad();
      tape.backward(loss.total);
      nn::adam_step(model.params(), adam);
    } catch (const TrainingError& e) {
      result.diverged = true;
      result.divergence = "episode " + std::to_string(ep) + ": " + e.what();
      break;
    }
    result.episodes_run = ep;
    window_return += buf.episode_return();
    window_entropy += loss.entropy_sum;
    ++window_episodes;
    window_steps += buf.steps.size();

    if (ep % cfg.eval_every == 0) {
      run_validation(ep);
      if (stale >= cfg.patience) {
        result.stopped_early = true;
        break;
      }
    }
  }
  // The final state always gets a validation score so that best <= last holds.
  if (result.curve.empty() || result.curve.back().episode != result.episodes_run) {
    run_validation(result.episodes_run);
  }
  result.last = model;
  return result;
}

// ---------------------------------------------------------------------------
// Temperature tuning for the stochastic walkers.

struct TuneResult {
  double best_tau = 0;
  std::vector<std::pair<double, double>> curve;  // (tau, validation oracle ratio)
};

inline std::vector<double> default_tau_grid() {
  return {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
}

// Arg-min of validation oracle ratio over the grid; ties go to the smaller tau.
inline TuneResult tune_temperature(const AttributedGraph& g, WalkerKind kind,
                                   std::vector<double> grid, const PairSet& val_pairs,
                                   const EvalOptions& opt) {
  if (grid.empty()) throw ConfigError("temperature grid is empty");
  std::sort(grid.begin(), grid.end());
  const auto oracle = oracle_lengths(g, val_pairs);
  TuneResult out;
  double best = std::numeric_limits<double>::infinity();
  for (double tau : grid) {
    WalkerPolicy policy(g, kind, tau);
    const double score = rollout_policy(g, policy, val_pairs, oracle, opt).oracle_ratio.mean;
    out.curve.emplace_back(tau, score);
    if (score < best) {
      best = score;
      out.best_tau = tau;
    }
  }
  return out;
}

}  // namespace garden::train
