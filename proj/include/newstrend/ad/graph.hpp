#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "newstrend/ad/tensor.hpp"
#include "newstrend/error.hpp"

namespace newstrend::ad {

enum class OpKind {
  leaf,
  matmul,
  add,
  sigmoid,
  tanh,
  softmax,
  hadamard,
  concat,
  mean,
  weighted_sum,
  cross_entropy,
  scale,
};

inline const char* op_name(OpKind op) {
  switch (op) {
    case OpKind::leaf: return "leaf";
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::tanh: return "tanh";
    case OpKind::softmax: return "softmax";
    case OpKind::hadamard: return "hadamard";
    case OpKind::concat: return "concat";
    case OpKind::mean: return "mean";
    case OpKind::weighted_sum: return "weighted_sum";
    case OpKind::cross_entropy: return "cross_entropy";
    case OpKind::scale: return "scale";
  }
  return "?";
}

struct NodeId {
  std::size_t index = std::numeric_limits<std::size_t>::max();
  auto operator<=>(const NodeId&) const = default;
};

struct OpAttrs {
  double factor = 1.0;     // scale
  std::size_t axis = 0;    // concat
  std::size_t label = 0;   // cross_entropy
};

struct Node {
  NodeId id;
  OpKind op = OpKind::leaf;
  std::vector<NodeId> parents;
  TensorValue value;
  TensorValue grad;
  OpAttrs attrs;
  bool requires_grad = false;
};

// Gradients of a scalar loss with respect to the parameter leaves.
class GradientMap {
 public:
  void insert(NodeId id, TensorValue g) { grads_.emplace(id.index, std::move(g)); }
  const TensorValue& at(NodeId id) const {
    auto it = grads_.find(id.index);
    if (it == grads_.end()) throw ConfigError("no gradient recorded for node " + std::to_string(id.index));
    return it->second;
  }
  TensorValue& at(NodeId id) { return const_cast<TensorValue&>(std::as_const(*this).at(id)); }
  bool contains(NodeId id) const { return grads_.count(id.index) != 0; }
  std::size_t size() const { return grads_.size(); }
  auto begin() const { return grads_.begin(); }
  auto end() const { return grads_.end(); }

 private:
  std::map<std::size_t, TensorValue> grads_;
};

namespace detail {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

[[noreturn]] inline void shape_mismatch(OpKind op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op_name(op)) + ": incompatible shapes " + a.str() + " and " + b.str());
}

inline void softmax_rows(std::span<const double> in, std::span<double> out, std::size_t cols) {
  const std::size_t rows = in.size() / cols;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in.data() + r * cols;
    double* y = out.data() + r * cols;
    double m = x[0];
    for (std::size_t j = 1; j < cols; ++j) m = std::max(m, x[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      y[j] = std::exp(x[j] - m);
      z += y[j];
    }
    for (std::size_t j = 0; j < cols; ++j) y[j] /= z;
  }
}

// Four interleaved partial sums, combined pairwise.
inline double dot(const double* x, const double* y, std::size_t n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    s0 += x[j] * y[j];
    s1 += x[j + 1] * y[j + 1];
    s2 += x[j + 2] * y[j + 2];
    s3 += x[j + 3] * y[j + 3];
  }
  for (; j < n; ++j) s0 += x[j] * y[j];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace detail

// Define-by-run tape. Nodes are appended in topological order; a graph is
// confined to one thread.
class Graph {
 public:
  Graph() = default;

  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(id.index); }
  const TensorValue& value(NodeId id) const { return node(id).value; }
  const TensorValue& grad(NodeId id) const { return node(id).grad; }

  void clear() { nodes_.clear(); }

  // Differentiable input.
  NodeId parameter(TensorValue v) { return push_leaf(std::move(v), true); }
  // Non-differentiable input (data, fixed states).
  NodeId constant(TensorValue v) { return push_leaf(std::move(v), false); }

  NodeId apply(OpKind op, std::span<const NodeId> inputs, const OpAttrs& attrs = {}) {
    for (NodeId p : inputs) {
      if (p.index >= nodes_.size()) throw ConfigError("input node does not exist in this graph");
    }
    switch (op) {
      case OpKind::leaf: throw ConfigError("leaves are created with parameter() or constant()");
      case OpKind::matmul: return forward_matmul(inputs);
      case OpKind::add: return forward_add(inputs);
      case OpKind::sigmoid:
      case OpKind::tanh: return forward_unary(op, inputs);
      case OpKind::softmax: return forward_softmax(inputs);
      case OpKind::hadamard: return forward_hadamard(inputs);
      case OpKind::concat: return forward_concat(inputs, attrs);
      case OpKind::mean: return forward_mean(inputs);
      case OpKind::weighted_sum: return forward_weighted_sum(inputs);
      case OpKind::cross_entropy: return forward_cross_entropy(inputs, attrs);
      case OpKind::scale: return forward_scale(inputs, attrs);
    }
    throw ConfigError("unknown op");
  }

  NodeId matmul(NodeId a, NodeId b) { return apply(OpKind::matmul, std::array{a, b}); }
  NodeId add(NodeId a, NodeId b) { return apply(OpKind::add, std::array{a, b}); }
  NodeId sigmoid(NodeId a) { return apply(OpKind::sigmoid, std::array{a}); }
  NodeId tanh(NodeId a) { return apply(OpKind::tanh, std::array{a}); }
  NodeId softmax(NodeId a) { return apply(OpKind::softmax, std::array{a}); }
  NodeId hadamard(NodeId a, NodeId b) { return apply(OpKind::hadamard, std::array{a, b}); }
  NodeId concat(std::span<const NodeId> xs, std::size_t axis) {
    return apply(OpKind::concat, xs, OpAttrs{.axis = axis});
  }
  NodeId mean(std::span<const NodeId> xs) { return apply(OpKind::mean, xs); }
  // weights (k entries) first, then the k terms.
  NodeId weighted_sum(NodeId weights, std::span<const NodeId> xs) {
    std::vector<NodeId> in;
    in.reserve(xs.size() + 1);
    in.push_back(weights);
    in.insert(in.end(), xs.begin(), xs.end());
    return apply(OpKind::weighted_sum, in);
  }
  NodeId cross_entropy(NodeId probs, std::size_t label) {
    return apply(OpKind::cross_entropy, std::array{probs}, OpAttrs{.label = label});
  }
  NodeId scale(NodeId a, double factor) {
    return apply(OpKind::scale, std::array{a}, OpAttrs{.factor = factor});
  }

  // Reverse sweep from a scalar loss. Gradients accumulate over fan-out.
  // Parameter-leaf gradients are moved into the returned map; values are
  // left untouched.
  GradientMap backward(NodeId loss) {
    run_backward(loss);
    GradientMap out;
    for (Node& n : nodes_) {
      if (n.op == OpKind::leaf && n.requires_grad) out.insert(n.id, std::move(n.grad));
    }
    return out;
  }

  // Same sweep, leaving every gradient in place (readable via grad()).
  void backward_in_place(NodeId loss) { run_backward(loss); }

 private:
  std::vector<Node> nodes_;

  NodeId push_leaf(TensorValue v, bool requires_grad) {
    Node n;
    n.id = NodeId{nodes_.size()};
    n.op = OpKind::leaf;
    n.value = std::move(v);
    n.requires_grad = requires_grad;
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
  }

  NodeId push(OpKind op, std::span<const NodeId> inputs, TensorValue v, const OpAttrs& attrs = {}) {
    Node n;
    n.id = NodeId{nodes_.size()};
    n.op = op;
    n.parents.assign(inputs.begin(), inputs.end());
    n.value = std::move(v);
    n.attrs = attrs;
    for (NodeId p : inputs) n.requires_grad = n.requires_grad || nodes_[p.index].requires_grad;
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
  }

  const TensorValue& val(NodeId id) const { return nodes_[id.index].value; }

  static void expect_arity(OpKind op, std::span<const NodeId> inputs, std::size_t n) {
    if (inputs.size() != n) {
      throw ShapeError(std::string(op_name(op)) + ": expected " + std::to_string(n) + " inputs, got " +
                       std::to_string(inputs.size()));
    }
  }

  NodeId forward_matmul(std::span<const NodeId> in) {
    expect_arity(OpKind::matmul, in, 2);
    const TensorValue& a = val(in[0]);
    const TensorValue& b = val(in[1]);
    if (a.shape().rank() != 2 || b.shape().rank() != 2 || a.shape()[1] != b.shape()[0]) {
      detail::shape_mismatch(OpKind::matmul, a.shape(), b.shape());
    }
    const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
    TensorValue c(Shape{m, n});
    const double* A = a.data().data();
    const double* B = b.data().data();
    double* C = c.data().data();
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = A[i * k + p];
        const double* brow = B + p * n;
        double* crow = C + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
      }
    }
    return push(OpKind::matmul, in, std::move(c));
  }

  // Same shape, or b is a bias row [1, n] added to each row of a [m, n].
  static bool is_row_broadcast(const Shape& a, const Shape& b) {
    return a.rank() == 2 && b.rank() == 2 && b[0] == 1 && b[1] == a[1];
  }

  NodeId forward_add(std::span<const NodeId> in) {
    expect_arity(OpKind::add, in, 2);
    const TensorValue& a = val(in[0]);
    const TensorValue& b = val(in[1]);
    TensorValue c = a;
    if (a.shape() == b.shape()) {
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
    } else if (is_row_broadcast(a.shape(), b.shape())) {
      const std::size_t n = b.size();
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i % n];
    } else {
      detail::shape_mismatch(OpKind::add, a.shape(), b.shape());
    }
    return push(OpKind::add, in, std::move(c));
  }

  NodeId forward_unary(OpKind op, std::span<const NodeId> in) {
    expect_arity(op, in, 1);
    TensorValue y = val(in[0]);
    if (op == OpKind::sigmoid) {
      for (double& x : y.data()) x = detail::sigmoid(x);
    } else {
      for (double& x : y.data()) x = std::tanh(x);
    }
    return push(op, in, std::move(y));
  }

  NodeId forward_softmax(std::span<const NodeId> in) {
    expect_arity(OpKind::softmax, in, 1);
    const TensorValue& x = val(in[0]);
    if (x.empty()) throw ShapeError("softmax: empty axis");
    TensorValue y(x.shape());
    detail::softmax_rows(x.data(), y.data(), x.cols());
    return push(OpKind::softmax, in, std::move(y));
  }

  NodeId forward_hadamard(std::span<const NodeId> in) {
    expect_arity(OpKind::hadamard, in, 2);
    const TensorValue& a = val(in[0]);
    const TensorValue& b = val(in[1]);
    if (!(a.shape() == b.shape())) detail::shape_mismatch(OpKind::hadamard, a.shape(), b.shape());
    TensorValue c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= b[i];
    return push(OpKind::hadamard, in, std::move(c));
  }

  NodeId forward_concat(std::span<const NodeId> in, const OpAttrs& attrs) {
    if (in.empty()) throw ShapeError("concat: no inputs");
    const Shape& s0 = val(in[0]).shape();
    if (s0.rank() != 2 || attrs.axis > 1) {
      throw ShapeError("concat: supports rank-2 inputs along axis 0 or 1, got " + s0.str());
    }
    const std::size_t other = 1 - attrs.axis;
    std::size_t total = 0;
    for (NodeId id : in) {
      const Shape& s = val(id).shape();
      if (s.rank() != 2 || s[other] != s0[other]) detail::shape_mismatch(OpKind::concat, s0, s);
      total += s[attrs.axis];
    }
    Shape out = attrs.axis == 0 ? Shape{total, s0[1]} : Shape{s0[0], total};
    TensorValue y(out);
    if (attrs.axis == 0) {
      std::size_t off = 0;
      for (NodeId id : in) {
        const auto d = val(id).data();
        std::copy(d.begin(), d.end(), y.data().begin() + static_cast<std::ptrdiff_t>(off));
        off += d.size();
      }
    } else {
      const std::size_t rows = s0[0];
      std::size_t col_off = 0;
      for (NodeId id : in) {
        const TensorValue& x = val(id);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < x.cols(); ++c) y(r, col_off + c) = x(r, c);
        }
        col_off += x.cols();
      }
    }
    return push(OpKind::concat, in, std::move(y), attrs);
  }

  NodeId forward_mean(std::span<const NodeId> in) {
    if (in.empty()) throw ShapeError("mean: no inputs");
    const TensorValue& x0 = val(in[0]);
    TensorValue y(x0.shape());
    for (NodeId id : in) {
      const TensorValue& x = val(id);
      if (!(x.shape() == x0.shape())) detail::shape_mismatch(OpKind::mean, x0.shape(), x.shape());
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
    }
    const double inv = 1.0 / static_cast<double>(in.size());
    for (double& v : y.data()) v *= inv;
    return push(OpKind::mean, in, std::move(y));
  }

  NodeId forward_weighted_sum(std::span<const NodeId> in) {
    if (in.size() < 2) throw ShapeError("weighted_sum: needs weights and at least one term");
    const TensorValue& w = val(in[0]);
    const std::size_t k = in.size() - 1;
    if (w.size() != k) {
      throw ShapeError("weighted_sum: " + std::to_string(k) + " terms but weights of shape " + w.shape().str());
    }
    const TensorValue& x0 = val(in[1]);
    TensorValue y(x0.shape());
    for (std::size_t i = 0; i < k; ++i) {
      const TensorValue& x = val(in[i + 1]);
      if (!(x.shape() == x0.shape())) detail::shape_mismatch(OpKind::weighted_sum, x0.shape(), x.shape());
      const double wi = w[i];
      for (std::size_t j = 0; j < y.size(); ++j) y[j] += wi * x[j];
    }
    return push(OpKind::weighted_sum, in, std::move(y));
  }

  NodeId forward_cross_entropy(std::span<const NodeId> in, const OpAttrs& attrs) {
    expect_arity(OpKind::cross_entropy, in, 1);
    const TensorValue& p = val(in[0]);
    if (p.rows() != 1 || attrs.label >= p.size()) {
      throw ShapeError("cross_entropy: label " + std::to_string(attrs.label) + " invalid for shape " +
                       p.shape().str());
    }
    return push(OpKind::cross_entropy, in, TensorValue::scalar(-std::log(p[attrs.label])), attrs);
  }

  NodeId forward_scale(std::span<const NodeId> in, const OpAttrs& attrs) {
    expect_arity(OpKind::scale, in, 1);
    TensorValue y = val(in[0]);
    for (double& v : y.data()) v *= attrs.factor;
    return push(OpKind::scale, in, std::move(y), attrs);
  }

  void run_backward(NodeId loss) {
    if (loss.index >= nodes_.size()) throw ConfigError("loss node does not exist in this graph");
    if (nodes_[loss.index].value.size() != 1) {
      throw ShapeError("backward: loss must be scalar, got shape " + nodes_[loss.index].value.shape().str());
    }
    for (Node& n : nodes_) {
      if (n.requires_grad) {
        n.grad = TensorValue(n.value.shape());
      } else {
        n.grad = TensorValue();
      }
    }
    if (!nodes_[loss.index].requires_grad) return;
    nodes_[loss.index].grad[0] = 1.0;
    for (std::size_t i = loss.index + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.requires_grad || n.op == OpKind::leaf) continue;
      propagate(n);
    }
  }

  TensorValue* grad_of(NodeId id) {
    Node& p = nodes_[id.index];
    return p.requires_grad ? &p.grad : nullptr;
  }

  void propagate(const Node& n) {
    const TensorValue& g = n.grad;
    switch (n.op) {
      case OpKind::leaf: return;
      case OpKind::matmul: {
        const TensorValue& a = val(n.parents[0]);
        const TensorValue& b = val(n.parents[1]);
        const std::size_t m = a.shape()[0], k = a.shape()[1], cols = b.shape()[1];
        const double* G = g.data().data();
        if (TensorValue* ga = grad_of(n.parents[0])) {
          const double* B = b.data().data();
          double* GA = ga->data().data();
          for (std::size_t i = 0; i < m; ++i) {
            const double* grow = G + i * cols;
            for (std::size_t p = 0; p < k; ++p) {
              GA[i * k + p] += detail::dot(grow, B + p * cols, cols);
            }
          }
        }
        if (TensorValue* gb = grad_of(n.parents[1])) {
          const double* A = a.data().data();
          double* GB = gb->data().data();
          for (std::size_t i = 0; i < m; ++i) {
            const double* grow = G + i * cols;
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = A[i * k + p];
              double* out = GB + p * cols;
              for (std::size_t j = 0; j < cols; ++j) out[j] += aip * grow[j];
            }
          }
        }
        return;
      }
      case OpKind::add: {
        if (TensorValue* ga = grad_of(n.parents[0])) {
          for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
        }
        if (TensorValue* gb = grad_of(n.parents[1])) {
          const std::size_t nb = gb->size();
          for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i % nb] += g[i];
        }
        return;
      }
      case OpKind::sigmoid: {
        if (TensorValue* gx = grad_of(n.parents[0])) {
          for (std::size_t i = 0; i < g.size(); ++i) {
            const double y = n.value[i];
            (*gx)[i] += g[i] * y * (1.0 - y);
          }
        }
        return;
      }
      case OpKind::tanh: {
        if (TensorValue* gx = grad_of(n.parents[0])) {
          for (std::size_t i = 0; i < g.size(); ++i) {
            const double y = n.value[i];
            (*gx)[i] += g[i] * (1.0 - y * y);
          }
        }
        return;
      }
      case OpKind::softmax: {
        // y * (g - <g, y>) per row.
        if (TensorValue* gx = grad_of(n.parents[0])) {
          const std::size_t cols = n.value.cols();
          const std::size_t rows = n.value.size() / cols;
          for (std::size_t r = 0; r < rows; ++r) {
            double dot = 0.0;
            for (std::size_t j = 0; j < cols; ++j) dot += g[r * cols + j] * n.value[r * cols + j];
            for (std::size_t j = 0; j < cols; ++j) {
              const std::size_t idx = r * cols + j;
              (*gx)[idx] += n.value[idx] * (g[idx] - dot);
            }
          }
        }
        return;
      }
      case OpKind::hadamard: {
        const TensorValue& a = val(n.parents[0]);
        const TensorValue& b = val(n.parents[1]);
        if (TensorValue* ga = grad_of(n.parents[0])) {
          for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * b[i];
        }
        if (TensorValue* gb = grad_of(n.parents[1])) {
          for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * a[i];
        }
        return;
      }
      case OpKind::concat: {
        if (n.attrs.axis == 0) {
          std::size_t off = 0;
          for (NodeId p : n.parents) {
            const std::size_t len = val(p).size();
            if (TensorValue* gp = grad_of(p)) {
              for (std::size_t i = 0; i < len; ++i) (*gp)[i] += g[off + i];
            }
            off += len;
          }
        } else {
          const std::size_t rows = n.value.shape()[0];
          std::size_t col_off = 0;
          for (NodeId p : n.parents) {
            const std::size_t pc = val(p).cols();
            if (TensorValue* gp = grad_of(p)) {
              for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < pc; ++c) (*gp)[r * pc + c] += g(r, col_off + c);
              }
            }
            col_off += pc;
          }
        }
        return;
      }
      case OpKind::mean: {
        const double inv = 1.0 / static_cast<double>(n.parents.size());
        for (NodeId p : n.parents) {
          if (TensorValue* gp = grad_of(p)) {
            for (std::size_t i = 0; i < g.size(); ++i) (*gp)[i] += g[i] * inv;
          }
        }
        return;
      }
      case OpKind::weighted_sum: {
        const TensorValue& w = val(n.parents[0]);
        TensorValue* gw = grad_of(n.parents[0]);
        for (std::size_t k = 1; k < n.parents.size(); ++k) {
          const TensorValue& x = val(n.parents[k]);
          if (gw) {
            double dot = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * x[i];
            (*gw)[k - 1] += dot;
          }
          if (TensorValue* gx = grad_of(n.parents[k])) {
            const double wk = w[k - 1];
            for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += wk * g[i];
          }
        }
        return;
      }
      case OpKind::cross_entropy: {
        if (TensorValue* gp = grad_of(n.parents[0])) {
          const double p = val(n.parents[0])[n.attrs.label];
          (*gp)[n.attrs.label] += -g[0] / p;
        }
        return;
      }
      case OpKind::scale: {
        if (TensorValue* gx = grad_of(n.parents[0])) {
          for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += n.attrs.factor * g[i];
        }
        return;
      }
    }
  }
};

}  // namespace newstrend::ad
