#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "xgem/nd/tensor.hpp"

namespace xgem::nd {

class Graph;

/// Handle to a node recorded on a Graph. Cheap to copy; only valid while the
/// owning Graph is alive.
struct Var {
  Graph* graph = nullptr;
  std::size_t id = 0;
};

enum class OpKind {
  leaf,
  add,
  sub,
  mul,
  scale,
  shift,
  neg,
  matmul,
  relu,
  sigmoid,
  tanh,
  exp,
  log,
  sum,
  softmax,
  cross_entropy,
  softmax_cross_entropy,
  squared_error,
  bce,
  gaussian_kl,
};

std::string_view op_name(OpKind kind);

/// Record/replay reverse-mode differentiation tape.
///
/// Nodes are appended in evaluation order, so the tape is topologically
/// sorted by construction. `backward` walks it in reverse and accumulates
/// gradients by summation. Single-threaded; independent graphs may live on
/// different threads.
class Graph {
 public:
  /// Writes d(root)/d(input j) contributions into the input gradient buffers.
  /// Buffers for inputs that do not require a gradient are null.
  using BackwardFn = std::function<void(const Graph& graph, std::span<const double> upstream,
                                        std::span<std::vector<double>* const> input_grads)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Trainable leaf; gradients are reported for it after backward.
  Var parameter(Tensor value);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  OpKind kind(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Appends an operation node. `inputs` must already be on this graph.
  Var record(OpKind kind, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

  /// Reverse sweep from a scalar root. Resets gradients from any earlier sweep.
  void backward(Var root);

  /// Gradient of the last backward root w.r.t. v; zeros of v's shape when v was
  /// not reached.
  Tensor grad(Var v) const;

 private:
  struct Node {
    OpKind kind;
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad;
  };

  const Node& node(Var v) const;

  std::deque<Node> nodes_;  // deque: value() references survive later record() calls
  std::vector<std::vector<double>> grads_;
};

// Elementwise and arithmetic ops. Binary ops accept equal shapes, or a
// scalar (single-element) operand on either side; nothing else broadcasts.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var shift(Var a, double offset);
Var neg(Var a);
Var relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var exp(Var a);
Var log(Var a);

/// [m x k] * [k x n] -> [m x n]. Rank-1 operands are not promoted.
Var matmul(Var a, Var b);

/// Sum of all entries, as a scalar.
Var sum(Var a);
/// Row-wise softmax of a [batch x C] tensor, C >= 2, max-shifted.
Var softmax(Var logits);

// Losses. Every loss sums over all rows and entries (no batch averaging).

/// -sum_i log p[i, label_i] for probabilities p of shape [batch x C].
Var cross_entropy(Var probs, std::span<const int> labels);
/// -sum p_target * log p for a one-hot (or soft) target of the same shape.
Var cross_entropy(Var probs, const Tensor& target);
/// Cross entropy of softmax(logits) against class indices, fused for stability.
Var softmax_cross_entropy(Var logits, std::span<const int> labels);
/// sum (pred - target)^2
Var squared_error(Var prediction, Var target);
/// -sum [t log p + (1-t) log(1-p)] for probabilities p and targets t in [0,1].
Var bce(Var probs, const Tensor& target);
/// KL(N(mu, exp(logvar)) || N(0, 1)) = 1/2 sum(mu^2 + exp(logvar) - logvar - 1).
Var gaussian_kl(Var mu, Var logvar);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(Var a, double s) { return scale(a, s); }
inline Var operator*(double s, Var a) { return scale(a, s); }
inline Var operator+(Var a, double c) { return shift(a, c); }
inline Var operator-(Var a) { return neg(a); }

}  // namespace xgem::nd
