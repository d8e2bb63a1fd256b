#pragma once

#include <cmath>

#include "garden/error.hpp"
#include "garden/nn/parameters.hpp"

namespace garden::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam on the gradients currently stored in params. Throws
// TrainingError, leaving params untouched, if any gradient is non-finite.
inline void adam_step(ParameterSet& params, const AdamConfig& cfg) {
  for (const auto& p : params) {
    for (double g : p.grad) {
      if (!std::isfinite(g)) throw TrainingError("non-finite gradient in " + p.name);
    }
  }
  const auto t = static_cast<double>(params.adam_steps() + 1);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& p : params) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      double& m = p.first_moment[i];
      double& v = p.second_moment[i];
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
      p.value[i] -= cfg.learning_rate * (m / c1) / (std::sqrt(v / c2) + cfg.epsilon);
    }
  }
  params.set_adam_steps(params.adam_steps() + 1);
}

}  // namespace garden::nn
