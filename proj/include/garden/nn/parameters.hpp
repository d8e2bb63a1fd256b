#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "garden/error.hpp"
#include "garden/rng.hpp"

namespace garden::nn {

// One learnable tensor (row-major rows x cols) with its gradient accumulator
// and Adam moments.
struct Parameter {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<double> first_moment;
  std::vector<double> second_moment;

  std::size_t size() const noexcept { return value.size(); }

  friend bool operator==(const Parameter&, const Parameter&) = default;
};

// Value type holding every tensor of a model. Layers refer to tensors by index,
// so copying a ParameterSet snapshots the whole model.
class ParameterSet {
 public:
  std::size_t add(std::string name, std::size_t rows, std::size_t cols) {
    Parameter p;
    p.name = std::move(name);
    p.rows = rows;
    p.cols = cols;
    p.value.assign(rows * cols, 0.0);
    p.grad.assign(rows * cols, 0.0);
    p.first_moment.assign(rows * cols, 0.0);
    p.second_moment.assign(rows * cols, 0.0);
    params_.push_back(std::move(p));
    return params_.size() - 1;
  }

  Parameter& operator[](std::size_t i) { return params_.at(i); }
  const Parameter& operator[](std::size_t i) const { return params_.at(i); }
  std::size_t size() const noexcept { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  std::uint64_t adam_steps() const noexcept { return adam_steps_; }
  void set_adam_steps(std::uint64_t t) noexcept { adam_steps_ = t; }

  std::size_t scalar_count() const {
    std::size_t total = 0;
    for (const auto& p : params_) total += p.size();
    return total;
  }

  void zero_grad() {
    for (auto& p : params_) std::fill(p.grad.begin(), p.grad.end(), 0.0);
  }

  // Same names, shapes and values; gradients and moments are ignored.
  bool same_values(const ParameterSet& other) const {
    if (params_.size() != other.params_.size()) return false;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto& a = params_[i];
      const auto& b = other.params_[i];
      if (a.name != b.name || a.rows != b.rows || a.cols != b.cols || a.value != b.value) {
        return false;
      }
    }
    return true;
  }

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::vector<Parameter> params_;
  std::uint64_t adam_steps_ = 0;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
inline void init_fan_in_uniform(Parameter& p, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (auto& v : p.value) v = (2.0 * rng.uniform() - 1.0) * bound;
}

}  // namespace garden::nn
