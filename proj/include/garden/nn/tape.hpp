#pragma once
// Reverse-mode gradient tape over small dense vectors. Every op appends a node
// holding its forward value; backward() walks the nodes in reverse and
// accumulates parameter gradients into the owning ParameterSet.

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "garden/error.hpp"
#include "garden/nn/parameters.hpp"

namespace garden::nn {

struct Var {
  std::size_t id = static_cast<std::size_t>(-1);
  bool valid() const noexcept { return id != static_cast<std::size_t>(-1); }
};

class Tape {
 public:
  // With record = false the tape only evaluates; backward() is rejected.
  explicit Tape(ParameterSet& params, bool record = true)
      : params_(&params), record_(record), param_nodes_(params.size()) {}

  // Evaluation-only tape over frozen parameters.
  explicit Tape(const ParameterSet& params)
      : params_(const_cast<ParameterSet*>(&params)), record_(false),
        param_nodes_(params.size()) {}

  bool recording() const noexcept { return record_; }
  ParameterSet& parameters() noexcept { return *params_; }

  // ---- leaves -------------------------------------------------------------

  Var param(std::size_t index) {
    if (index >= param_nodes_.size()) throw ContractError("unknown parameter index");
    if (!param_nodes_[index].valid()) {
      const auto& p = (*params_)[index];
      Var v = push(p.value, p.rows, p.cols, record_, {});
      nodes_[v.id].param_index = index;
      param_nodes_[index] = v;
    }
    return param_nodes_[index];
  }

  Var constant(std::vector<double> value) {
    const auto n = value.size();
    return push(std::move(value), n, 1, false, {});
  }

  Var constant(std::span<const double> value) {
    return constant(std::vector<double>(value.begin(), value.end()));
  }

  Var scalar_constant(double x) { return constant(std::vector<double>{x}); }

  // ---- inspection ---------------------------------------------------------

  std::span<const double> value(Var v) const { return node(v).value; }
  double scalar(Var v) const {
    const auto& n = node(v);
    if (n.value.size() != 1) throw ContractError("scalar() on a non-scalar value");
    return n.value[0];
  }
  std::size_t size(Var v) const { return node(v).value.size(); }
  std::size_t node_count() const noexcept { return nodes_.size(); }

  // ---- ops ----------------------------------------------------------------

  // W x (+ b). W is rows x cols, x has cols entries.
  Var affine(Var w, Var x, Var b = {}) {
    const auto& wn = node(w);
    const auto& xn = node(x);
    const std::size_t rows = wn.rows, cols = wn.cols;
    if (xn.value.size() != cols) {
      throw ContractError("affine: input width " + std::to_string(xn.value.size()) +
                          " does not match weight columns " + std::to_string(cols));
    }
    if (b.valid() && node(b).value.size() != rows) throw ContractError("affine: bias width");
    std::vector<double> y(rows);
    const double* wp = wn.value.data();
    const double* xp = xn.value.data();
    for (std::size_t r = 0; r < rows; ++r) {
      double s = b.valid() ? node(b).value[r] : 0.0;
      const double* row = wp + r * cols;
      for (std::size_t c = 0; c < cols; ++c) s += row[c] * xp[c];
      y[r] = s;
    }
    const bool tr = tracked({w, x, b});
    return push(std::move(y), rows, 1, tr, [w, x, b, rows, cols](Tape& t, std::size_t self) {
      const auto& g = t.nodes_[self].grad;
      if (t.needs_grad(w)) {
        auto& gw = t.grad_of(w);
        const auto& xv = t.nodes_[x.id].value;
        for (std::size_t r = 0; r < rows; ++r) {
          const double gr = g[r];
          if (gr == 0.0) continue;
          double* row = gw.data() + r * cols;
          for (std::size_t c = 0; c < cols; ++c) row[c] += gr * xv[c];
        }
      }
      if (t.needs_grad(x)) {
        auto& gx = t.grad_of(x);
        const auto& wv = t.nodes_[w.id].value;
        for (std::size_t r = 0; r < rows; ++r) {
          const double gr = g[r];
          if (gr == 0.0) continue;
          const double* row = wv.data() + r * cols;
          for (std::size_t c = 0; c < cols; ++c) gx[c] += gr * row[c];
        }
      }
      if (b.valid() && t.needs_grad(b)) {
        auto& gb = t.grad_of(b);
        for (std::size_t r = 0; r < rows; ++r) gb[r] += g[r];
      }
    });
  }

  Var add(Var a, Var b) {
    auto y = binary_values(a, b, "add", [](double p, double q) { return p + q; });
    return push(std::move(y), tracked({a, b}), [a, b](Tape& t, std::size_t self) {
      const auto& g = t.nodes_[self].grad;
      t.accumulate(a, g);
      t.accumulate(b, g);
    });
  }

  Var sub(Var a, Var b) {
    auto y = binary_values(a, b, "sub", [](double p, double q) { return p - q; });
    return push(std::move(y), tracked({a, b}), [a, b](Tape& t, std::size_t self) {
      const auto& g = t.nodes_[self].grad;
      t.accumulate(a, g);
      if (t.needs_grad(b)) {
        auto& gb = t.grad_of(b);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
      }
    });
  }

  Var mul(Var a, Var b) {
    auto y = binary_values(a, b, "mul", [](double p, double q) { return p * q; });
    return push(std::move(y), tracked({a, b}), [a, b](Tape& t, std::size_t self) {
      const auto& g = t.nodes_[self].grad;
      const auto& av = t.nodes_[a.id].value;
      const auto& bv = t.nodes_[b.id].value;
      if (t.needs_grad(a)) {
        auto& ga = t.grad_of(a);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
      }
      if (t.needs_grad(b)) {
        auto& gb = t.grad_of(b);
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
      }
    });
  }

  Var scale(Var a, double c) {
    std::vector<double> y(node(a).value);
    for (auto& v : y) v *= c;
    return push(std::move(y), tracked({a}), [a, c](Tape& t, std::size_t self) {
      if (!t.needs_grad(a)) return;
      const auto& g = t.nodes_[self].grad;
      auto& ga = t.grad_of(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
    });
  }

  Var neg(Var a) { return scale(a, -1.0); }

  Var square(Var a) { return mul(a, a); }

  Var relu(Var a) {
    return unary(a, [](double x) { return x > 0 ? x : 0.0; },
                 [](double x, double) { return x > 0 ? 1.0 : 0.0; });
  }

  Var elu(Var a) {
    return unary(a, [](double x) { return x > 0 ? x : std::expm1(x); },
                 [](double x, double y) { return x > 0 ? 1.0 : y + 1.0; });
  }

  Var leaky_relu(Var a, double slope) {
    return unary(a, [slope](double x) { return x > 0 ? x : slope * x; },
                 [slope](double x, double) { return x > 0 ? 1.0 : slope; });
  }

  Var exp(Var a) {
    return unary(a, [](double x) { return std::exp(x); },
                 [](double, double y) { return y; });
  }

  Var log(Var a) {
    return unary(a, [](double x) { return std::log(x); },
                 [](double x, double) { return 1.0 / x; });
  }

  Var concat(std::span<const Var> parts) {
    std::vector<double> y;
    for (Var p : parts) {
      const auto& v = node(p).value;
      y.insert(y.end(), v.begin(), v.end());
    }
    std::vector<Var> keep(parts.begin(), parts.end());
    const bool tr = tracked(keep);
    return push(std::move(y), tr, [keep = std::move(keep)](Tape& t, std::size_t self) {
      const auto& g = t.nodes_[self].grad;
      std::size_t offset = 0;
      for (Var p : keep) {
        const std::size_t n = t.nodes_[p.id].value.size();
        if (t.needs_grad(p)) {
          auto& gp = t.grad_of(p);
          for (std::size_t i = 0; i < n; ++i) gp[i] += g[offset + i];
        }
        offset += n;
      }
    });
  }

  Var concat(Var a, Var b) {
    const Var parts[] = {a, b};
    return concat(parts);
  }

  Var dot(Var a, Var b) {
    const auto& av = node(a).value;
    const auto& bv = node(b).value;
    if (av.size() != bv.size()) throw ContractError("dot: size mismatch");
    double s = 0;
    for (std::size_t i = 0; i < av.size(); ++i) s += av[i] * bv[i];
    return push({s}, tracked({a, b}), [a, b](Tape& t, std::size_t self) {
      const double g = t.nodes_[self].grad[0];
      const auto& av = t.nodes_[a.id].value;
      const auto& bv = t.nodes_[b.id].value;
      if (t.needs_grad(a)) {
        auto& ga = t.grad_of(a);
        for (std::size_t i = 0; i < av.size(); ++i) ga[i] += g * bv[i];
      }
      if (t.needs_grad(b)) {
        auto& gb = t.grad_of(b);
        for (std::size_t i = 0; i < bv.size(); ++i) gb[i] += g * av[i];
      }
    });
  }

  Var sum(Var a) {
    const auto& av = node(a).value;
    double s = 0;
    for (double v : av) s += v;
    return push({s}, tracked({a}), [a](Tape& t, std::size_t self) {
      if (!t.needs_grad(a)) return;
      const double g = t.nodes_[self].grad[0];
      for (auto& v : t.grad_of(a)) v += g;
    });
  }

  // Sum of scalar vars.
  Var add_all(std::span<const Var> scalars) {
    if (scalars.empty()) return scalar_constant(0.0);
    return sum(stack(scalars));
  }

  // Packs scalar vars into one vector.
  Var stack(std::span<const Var> scalars) {
    std::vector<double> y;
    y.reserve(scalars.size());
    for (Var s : scalars) {
      const auto& v = node(s).value;
      if (v.size() != 1) throw ContractError("stack: expects scalars");
      y.push_back(v[0]);
    }
    std::vector<Var> keep(scalars.begin(), scalars.end());
    const bool tr = tracked(keep);
    return push(std::move(y), tr, [keep = std::move(keep)](Tape& t, std::size_t self) {
      const auto& g = t.nodes_[self].grad;
      for (std::size_t i = 0; i < keep.size(); ++i) {
        if (t.needs_grad(keep[i])) t.grad_of(keep[i])[0] += g[i];
      }
    });
  }

  Var element(Var a, std::size_t i) {
    const auto& av = node(a).value;
    if (i >= av.size()) throw ContractError("element: index out of range");
    return push({av[i]}, tracked({a}), [a, i](Tape& t, std::size_t self) {
      if (t.needs_grad(a)) t.grad_of(a)[i] += t.nodes_[self].grad[0];
    });
  }

  Var softmax(Var a) {
    const auto& av = node(a).value;
    if (av.empty()) throw ContractError("softmax of empty vector");
    const double mx = *std::max_element(av.begin(), av.end());
    std::vector<double> y(av.size());
    double z = 0;
    for (std::size_t i = 0; i < av.size(); ++i) z += (y[i] = std::exp(av[i] - mx));
    for (auto& v : y) v /= z;
    return push(std::move(y), tracked({a}), [a](Tape& t, std::size_t self) {
      if (!t.needs_grad(a)) return;
      const auto& g = t.nodes_[self].grad;
      const auto& y = t.nodes_[self].value;
      double inner = 0;
      for (std::size_t i = 0; i < y.size(); ++i) inner += g[i] * y[i];
      auto& ga = t.grad_of(a);
      for (std::size_t i = 0; i < y.size(); ++i) ga[i] += y[i] * (g[i] - inner);
    });
  }

  Var log_softmax(Var a) {
    const auto& av = node(a).value;
    if (av.empty()) throw ContractError("log_softmax of empty vector");
    const double mx = *std::max_element(av.begin(), av.end());
    double z = 0;
    for (double v : av) z += std::exp(v - mx);
    const double lse = mx + std::log(z);
    std::vector<double> y(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) y[i] = av[i] - lse;
    return push(std::move(y), tracked({a}), [a](Tape& t, std::size_t self) {
      if (!t.needs_grad(a)) return;
      const auto& g = t.nodes_[self].grad;
      const auto& y = t.nodes_[self].value;
      double gs = 0;
      for (double v : g) gs += v;
      auto& ga = t.grad_of(a);
      for (std::size_t i = 0; i < y.size(); ++i) ga[i] += g[i] - std::exp(y[i]) * gs;
    });
  }

  // sum_i weights[i] * vectors[i]; weights is a vector var with one entry per item.
  Var weighted_sum(Var weights, std::span<const Var> vectors) {
    const auto& wv = node(weights).value;
    if (wv.size() != vectors.size() || vectors.empty()) {
      throw ContractError("weighted_sum: weight count mismatch");
    }
    const std::size_t n = node(vectors[0]).value.size();
    std::vector<double> y(n, 0.0);
    for (std::size_t k = 0; k < vectors.size(); ++k) {
      const auto& v = node(vectors[k]).value;
      if (v.size() != n) throw ContractError("weighted_sum: vector size mismatch");
      for (std::size_t i = 0; i < n; ++i) y[i] += wv[k] * v[i];
    }
    std::vector<Var> keep(vectors.begin(), vectors.end());
    const bool tr = tracked(keep) || tracked({weights});
    return push(std::move(y), tr, [weights, keep = std::move(keep)](Tape& t, std::size_t self) {
      const auto& g = t.nodes_[self].grad;
      const auto& wv = t.nodes_[weights.id].value;
      const bool gw = t.needs_grad(weights);
      for (std::size_t k = 0; k < keep.size(); ++k) {
        const auto& v = t.nodes_[keep[k].id].value;
        if (gw) {
          double s = 0;
          for (std::size_t i = 0; i < v.size(); ++i) s += g[i] * v[i];
          t.grad_of(weights)[k] += s;
        }
        if (t.needs_grad(keep[k])) {
          auto& gv = t.grad_of(keep[k]);
          for (std::size_t i = 0; i < v.size(); ++i) gv[i] += wv[k] * g[i];
        }
      }
    });
  }

  // Forward value passes through; no gradient flows back.
  Var stop_gradient(Var a) { return push(node(a).value, false, {}); }

  // ---- reverse pass -------------------------------------------------------

  // Accumulates d(loss)/d(theta) into parameters().grad (adds to what is there).
  void backward(Var loss) {
    if (!record_) throw ContractError("backward on a tape that did not record");
    if (!loss.valid() || loss.id >= nodes_.size()) {
      throw ContractError("backward on a value that is not on this tape");
    }
    if (nodes_[loss.id].value.size() != 1) throw ContractError("backward needs a scalar loss");
    for (auto& n : nodes_) n.grad.clear();
    grad_of(loss)[0] = 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      auto& n = nodes_[i];
      if (n.grad.empty()) continue;
      if (n.backward) n.backward(*this, i);
      if (n.param_index != kNoParam) {
        auto& pg = (*params_)[n.param_index].grad;
        for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += n.grad[k];
      }
    }
  }

  // Gradient of the last backward() with respect to an intermediate value.
  std::vector<double> gradient(Var v) const {
    const auto& n = node(v);
    if (n.grad.empty()) return std::vector<double>(n.value.size(), 0.0);
    return n.grad;
  }

 private:
  static constexpr std::size_t kNoParam = static_cast<std::size_t>(-1);
  using Backward = std::function<void(Tape&, std::size_t)>;

  struct Node {
    std::vector<double> value;
    std::vector<double> grad;
    std::size_t rows = 0;
    std::size_t cols = 1;
    Backward backward;
    std::size_t param_index = kNoParam;
    bool tracked = false;  // a parameter is upstream of this node
  };

  const Node& node(Var v) const {
    if (!v.valid() || v.id >= nodes_.size()) throw ContractError("value is not on this tape");
    return nodes_[v.id];
  }

  bool needs_grad(Var v) const { return nodes_[v.id].tracked; }

  std::vector<double>& grad_of(Var v) {
    auto& n = nodes_[v.id];
    if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
    return n.grad;
  }

  void accumulate(Var v, const std::vector<double>& g) {
    if (!needs_grad(v)) return;
    auto& gv = grad_of(v);
    for (std::size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
  }

  bool tracked(std::initializer_list<Var> vars) const {
    for (Var v : vars) {
      if (v.valid() && nodes_[v.id].tracked) return true;
    }
    return false;
  }

  bool tracked(const std::vector<Var>& vars) const {
    for (Var v : vars) {
      if (nodes_[v.id].tracked) return true;
    }
    return false;
  }

  Var push(std::vector<double> value, bool tracked, Backward backward) {
    const auto n = value.size();
    return push(std::move(value), n, 1, tracked, std::move(backward));
  }

  Var push(std::vector<double> value, std::size_t rows, std::size_t cols, bool tracked,
           Backward backward) {
    Node n;
    n.value = std::move(value);
    n.rows = rows;
    n.cols = cols;
    n.tracked = record_ && tracked;
    if (n.tracked) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
  }

  template <class F>
  std::vector<double> binary_values(Var a, Var b, const char* op, F f) {
    const auto& av = node(a).value;
    const auto& bv = node(b).value;
    if (av.size() != bv.size()) throw ContractError(std::string(op) + ": size mismatch");
    std::vector<double> y(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) y[i] = f(av[i], bv[i]);
    return y;
  }

  template <class F, class D>
  Var unary(Var a, F f, D df) {
    const auto& av = node(a).value;
    std::vector<double> y(av.size());
    for (std::size_t i = 0; i < av.size(); ++i) y[i] = f(av[i]);
    return push(std::move(y), tracked({a}), [a, df](Tape& t, std::size_t self) {
      if (!t.needs_grad(a)) return;
      const auto& g = t.nodes_[self].grad;
      const auto& x = t.nodes_[a.id].value;
      const auto& y = t.nodes_[self].value;
      auto& ga = t.grad_of(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * df(x[i], y[i]);
    });
  }

  ParameterSet* params_;
  bool record_;
  std::vector<Node> nodes_;
  std::vector<Var> param_nodes_;
};

}  // namespace garden::nn
