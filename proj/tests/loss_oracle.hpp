#pragma once
// Independent evaluation of the episodic actor-critic loss with frozen
// forwards, for comparison with the tape. Bootstrap targets and advantage
// weights are held fixed, which is what stop-gradient means for a
// finite-difference probe.

#include <algorithm>
#include <cmath>
#include <vector>

#include "garden/policies.hpp"
#include "garden/trainer.hpp"

namespace testing_support {

struct FrozenTerms {
  std::vector<double> bootstrap;  // gamma * v(u') at the reference parameters, 0 when terminal
  std::vector<double> advantage;  // A_t at the reference parameters
};

inline FrozenTerms freeze_terms(const garden::ActorCritic& model, const garden::AttributedGraph& g,
                                const garden::train::EpisodeBuffer& buf, double gamma) {
  using namespace garden;
  FrozenTerms out;
  const auto table = compute_feature_table(model, g);
  const auto msg = message_vector(model, g, buf.target, &table);
  for (const auto& rec : buf.steps) {
    const auto& tr = rec.transition;
    const double v = value_estimate(model, table[tr.from], msg);
    const double vn = value_estimate(model, table[tr.to], msg);
    out.bootstrap.push_back(tr.terminal ? 0.0 : gamma * vn);
    out.advantage.push_back(train::advantage(tr.reward, vn, v, tr.terminal, gamma));
  }
  return out;
}

struct LossParts {
  double policy = 0;   // -sum A log p
  double value = 0;    // sum (r + bootstrap - v)^2
  double entropy = 0;  // sum H
  double total(double lambda) const { return policy + value - lambda * entropy; }
};

inline LossParts reference_loss(const garden::ActorCritic& model, const garden::AttributedGraph& g,
                                const garden::train::EpisodeBuffer& buf,
                                const FrozenTerms& frozen) {
  using namespace garden;
  LossParts out;
  const auto table = compute_feature_table(model, g);
  const auto msg = message_vector(model, g, buf.target, &table);
  for (std::size_t t = 0; t < buf.steps.size(); ++t) {
    const auto& tr = buf.steps[t].transition;
    const double v = value_estimate(model, table[tr.from], msg);
    const double a = tr.reward + frozen.bootstrap[t] - v;
    out.value += a * a;
    auto nbrs = g.neighbors(tr.from);
    std::vector<double> logits;
    for (NodeId j : nbrs) logits.push_back(policy_logit(model, table[j], msg));
    double mx = logits[0];
    for (double l : logits) mx = std::max(mx, l);
    double z = 0;
    for (double l : logits) z += std::exp(l - mx);
    const double lz = mx + std::log(z);
    double h = 0;
    for (double l : logits) h -= std::exp(l - lz) * (l - lz);
    out.entropy += h;
    out.policy -= frozen.advantage[t] * (logits[buf.steps[t].action_index] - lz);
  }
  return out;
}

// Biases start at zero, which parks a ReLU unit exactly on its kink whenever
// all of its inputs are inactive. Finite differences are meaningless there,
// so probes first move every bias off zero.
inline void jitter_biases(garden::ActorCritic& model, std::uint64_t seed, double scale = 0.1) {
  garden::Rng rng(seed);
  for (auto& p : model.params()) {
    if (p.name.size() < 5 || p.name.compare(p.name.size() - 4, 4, "bias") != 0) continue;
    for (auto& b : p.value) b += scale * (2 * rng.uniform() - 1);
  }
}

// Worst relative error between the tape gradient of the episodic loss and
// central differences of reference_loss, over every parameter scalar.
inline double episode_gradient_error(garden::ActorCritic& model, const garden::AttributedGraph& g,
                                     const garden::train::EpisodeBuffer& buf,
                                     const garden::train::TrainConfig& cfg, double h = 1e-4) {
  using namespace garden;
  auto& ps = model.params();
  ps.zero_grad();
  {
    nn::Tape tape(ps);
    auto loss = train::episode_loss(tape, model, g, buf, cfg);
    tape.backward(loss.total);
  }
  const auto frozen = freeze_terms(model, g, buf, cfg.gamma);
  double worst = 0;
  for (auto& p : ps) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      double& x = p.value[i];
      const double x0 = x;
      x = x0 + h;
      const double up = reference_loss(model, g, buf, frozen).total(cfg.entropy_coef);
      x = x0 - h;
      const double down = reference_loss(model, g, buf, frozen).total(cfg.entropy_coef);
      x = x0;
      const double fd = (up - down) / (2 * h);
      const double err = std::abs(fd - p.grad[i]) /
                         std::max({std::abs(fd), std::abs(p.grad[i]), 1e-3});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace testing_support
