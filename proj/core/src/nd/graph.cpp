#include "xgem/nd/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xgem/error.hpp"

namespace xgem::nd {

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::leaf: return "leaf";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::scale: return "scale";
    case OpKind::shift: return "shift";
    case OpKind::neg: return "neg";
    case OpKind::matmul: return "matmul";
    case OpKind::relu: return "relu";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::tanh: return "tanh";
    case OpKind::exp: return "exp";
    case OpKind::log: return "log";
    case OpKind::sum: return "sum";
    case OpKind::softmax: return "softmax";
    case OpKind::cross_entropy: return "cross_entropy";
    case OpKind::softmax_cross_entropy: return "softmax_cross_entropy";
    case OpKind::squared_error: return "squared_error";
    case OpKind::bce: return "bce";
    case OpKind::gaussian_kl: return "gaussian_kl";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Graph

Var Graph::constant(Tensor value) {
  nodes_.push_back(Node{OpKind::leaf, std::move(value), {}, {}, false});
  return Var{this, nodes_.size() - 1};
}

Var Graph::parameter(Tensor value) {
  nodes_.push_back(Node{OpKind::leaf, std::move(value), {}, {}, true});
  return Var{this, nodes_.size() - 1};
}

const Graph::Node& Graph::node(Var v) const {
  if (v.id >= nodes_.size()) throw Error("Var does not belong to this graph");
  return nodes_[v.id];
}

const Tensor& Graph::value(Var v) const { return node(v).value; }
bool Graph::requires_grad(Var v) const { return node(v).requires_grad; }
OpKind Graph::kind(Var v) const { return node(v).kind; }

Var Graph::record(OpKind kind, Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
  bool needs = false;
  for (auto id : inputs) {
    if (id >= nodes_.size()) throw Error("op input is not on this graph");
    needs = needs || nodes_[id].requires_grad;
  }
  nodes_.push_back(Node{kind, std::move(value), std::move(inputs), std::move(backward), needs});
  return Var{this, nodes_.size() - 1};
}

void Graph::backward(Var root) {
  const auto& r = node(root);
  if (r.value.size() != 1) {
    throw ShapeError("backward root must be scalar, got shape " + to_string(r.value.shape()));
  }
  grads_.assign(nodes_.size(), {});
  grads_[root.id].assign(1, 1.0);
  std::vector<std::vector<double>*> input_grads;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (!n.requires_grad || grads_[i].empty() || !n.backward) continue;
    input_grads.clear();
    for (auto in : n.inputs) {
      if (!nodes_[in].requires_grad) {
        input_grads.push_back(nullptr);
        continue;
      }
      auto& buf = grads_[in];
      if (buf.empty()) buf.assign(nodes_[in].value.size(), 0.0);
      input_grads.push_back(&buf);
    }
    n.backward(*this, grads_[i], input_grads);
  }
}

Tensor Graph::grad(Var v) const {
  const auto& n = node(v);
  if (v.id < grads_.size() && !grads_[v.id].empty()) return Tensor(n.value.shape(), grads_[v.id]);
  return Tensor::zeros(n.value.shape());
}

// ---------------------------------------------------------------------------
// Ops

namespace {

Graph& graph_of(Var a) {
  if (!a.graph) throw Error("Var is not attached to a graph");
  return *a.graph;
}

Graph& graph_of(Var a, Var b) {
  if (a.graph != b.graph) throw Error("operands live on different graphs");
  return graph_of(a);
}

const Tensor& val(const Graph& g, std::size_t id) { return g.value(Var{nullptr, id}); }

Tensor make(OpKind kind, Shape shape, std::vector<double> data) {
  for (double v : data) {
    if (!std::isfinite(v)) throw NumericError(std::string(op_name(kind)) + " produced a non-finite value");
  }
  return Tensor(std::move(shape), std::move(data));
}

enum class Layout { equal, scalar_left, scalar_right };

Layout binary_layout(OpKind kind, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) return Layout::equal;
  if (a.size() == 1) return Layout::scalar_left;
  if (b.size() == 1) return Layout::scalar_right;
  throw ShapeError(std::string(op_name(kind)) + ": shapes " + to_string(a.shape()) + " and " +
                   to_string(b.shape()) + " are neither equal nor scalar-tensor");
}

template <typename Fwd, typename DA, typename DB>
Var binary(OpKind kind, Var a, Var b, Fwd fwd, DA da, DB db) {
  Graph& g = graph_of(a, b);
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  const Layout layout = binary_layout(kind, av, bv);
  const Tensor& big = layout == Layout::scalar_left ? bv : av;
  const std::size_t n = big.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = layout == Layout::scalar_left ? av[0] : av[i];
    const double y = layout == Layout::scalar_right ? bv[0] : bv[i];
    out[i] = fwd(x, y);
  }
  const std::size_t ia = a.id, ib = b.id;
  return g.record(kind, make(kind, big.shape(), std::move(out)), {ia, ib},
                  [ia, ib, layout, da, db](const Graph& gr, std::span<const double> up,
                                           std::span<std::vector<double>* const> grads) {
                    const Tensor& x = val(gr, ia);
                    const Tensor& y = val(gr, ib);
                    for (std::size_t i = 0; i < up.size(); ++i) {
                      const std::size_t ix = layout == Layout::scalar_left ? 0 : i;
                      const std::size_t iy = layout == Layout::scalar_right ? 0 : i;
                      if (grads[0]) (*grads[0])[ix] += up[i] * da(x[ix], y[iy]);
                      if (grads[1]) (*grads[1])[iy] += up[i] * db(x[ix], y[iy]);
                    }
                  });
}

/// Elementwise unary op; `deriv(x, y)` receives input and output values.
template <typename Fwd, typename Deriv>
Var unary(OpKind kind, Var a, Fwd fwd, Deriv deriv) {
  Graph& g = graph_of(a);
  const Tensor& av = g.value(a);
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
  const std::size_t ia = a.id;
  const std::size_t iself = g.size();  // id this node is about to receive
  return g.record(kind, make(kind, av.shape(), std::move(out)), {ia},
                  [ia, iself, deriv](const Graph& gr, std::span<const double> up,
                                     std::span<std::vector<double>* const> grads) {
                    if (!grads[0]) return;
                    const Tensor& x = val(gr, ia);
                    const Tensor& y = val(gr, iself);
                    for (std::size_t i = 0; i < up.size(); ++i) (*grads[0])[i] += up[i] * deriv(x[i], y[i]);
                  });
}

std::size_t check_labels(OpKind kind, const Tensor& probs, std::span<const int> labels) {
  if (probs.rank() != 2) throw ShapeError(std::string(op_name(kind)) + " expects [batch x C]");
  if (labels.size() != probs.rows()) {
    throw ShapeError(std::string(op_name(kind)) + ": " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(probs.rows()) + " rows");
  }
  const std::size_t c = probs.cols();
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= c) {
      throw ConfigError(std::string(op_name(kind)) + ": class index " + std::to_string(y) + " outside [0, " +
                        std::to_string(c) + ")");
    }
  }
  return c;
}

}  // namespace

Var add(Var a, Var b) {
  return binary(
      OpKind::add, a, b, [](double x, double y) { return x + y; }, [](double, double) { return 1.0; },
      [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary(
      OpKind::sub, a, b, [](double x, double y) { return x - y; }, [](double, double) { return 1.0; },
      [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary(
      OpKind::mul, a, b, [](double x, double y) { return x * y; }, [](double, double y) { return y; },
      [](double x, double) { return x; });
}

Var scale(Var a, double factor) {
  Graph& g = graph_of(a);
  const Tensor& av = g.value(a);
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * factor;
  return g.record(OpKind::scale, make(OpKind::scale, av.shape(), std::move(out)), {a.id},
                  [factor](const Graph&, std::span<const double> up, std::span<std::vector<double>* const> grads) {
                    if (!grads[0]) return;
                    for (std::size_t i = 0; i < up.size(); ++i) (*grads[0])[i] += up[i] * factor;
                  });
}

Var shift(Var a, double offset) {
  Graph& g = graph_of(a);
  const Tensor& av = g.value(a);
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + offset;
  return g.record(OpKind::shift, make(OpKind::shift, av.shape(), std::move(out)), {a.id},
                  [](const Graph&, std::span<const double> up, std::span<std::vector<double>* const> grads) {
                    if (!grads[0]) return;
                    for (std::size_t i = 0; i < up.size(); ++i) (*grads[0])[i] += up[i];
                  });
}

Var neg(Var a) { return scale(a, -1.0); }

Var relu(Var a) {
  return unary(
      OpKind::relu, a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Var a) {
  return unary(
      OpKind::sigmoid, a,
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(
      OpKind::tanh, a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var exp(Var a) {
  return unary(
      OpKind::exp, a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  const Tensor& av = graph_of(a).value(a);
  for (double v : av.values()) {
    if (!(v > 0.0)) throw NumericError("log of non-positive entry " + std::to_string(v));
  }
  return unary(
      OpKind::log, a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  if (av.rank() != 2 || bv.rank() != 2) {
    throw ShapeError("matmul expects rank-2 operands, got " + to_string(av.shape()) + " and " + to_string(bv.shape()));
  }
  const std::size_t m = av.shape()[0], k = av.shape()[1], n = bv.shape()[1];
  if (bv.shape()[0] != k) {
    throw ShapeError("matmul inner extents differ: " + to_string(av.shape()) + " * " + to_string(bv.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  const auto A = av.values();
  const auto B = bv.values();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = B.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
    }
  }
  const std::size_t ia = a.id, ib = b.id;
  return g.record(OpKind::matmul, make(OpKind::matmul, {m, n}, std::move(out)), {ia, ib},
                  [ia, ib, m, k, n](const Graph& gr, std::span<const double> up,
                                    std::span<std::vector<double>* const> grads) {
                    const auto A = val(gr, ia).values();
                    const auto B = val(gr, ib).values();
                    if (grads[0]) {  // dA = dC * B^T
                      auto& dA = *grads[0];
                      for (std::size_t i = 0; i < m; ++i) {
                        for (std::size_t p = 0; p < k; ++p) {
                          double acc = 0.0;
                          for (std::size_t j = 0; j < n; ++j) acc += up[i * n + j] * B[p * n + j];
                          dA[i * k + p] += acc;
                        }
                      }
                    }
                    if (grads[1]) {  // dB = A^T * dC
                      auto& dB = *grads[1];
                      for (std::size_t i = 0; i < m; ++i) {
                        for (std::size_t p = 0; p < k; ++p) {
                          const double aip = A[i * k + p];
                          if (aip == 0.0) continue;
                          for (std::size_t j = 0; j < n; ++j) dB[p * n + j] += aip * up[i * n + j];
                        }
                      }
                    }
                  });
}

Var sum(Var a) {
  Graph& g = graph_of(a);
  const Tensor& av = g.value(a);
  double acc = 0.0;
  for (double v : av.values()) acc += v;
  return g.record(OpKind::sum, make(OpKind::sum, {}, {acc}), {a.id},
                  [](const Graph&, std::span<const double> up, std::span<std::vector<double>* const> grads) {
                    if (!grads[0]) return;
                    for (auto& d : *grads[0]) d += up[0];
                  });
}

Var softmax(Var logits) {
  Graph& g = graph_of(logits);
  const Tensor& lv = g.value(logits);
  if (lv.rank() != 2 || lv.cols() < 2) throw ShapeError("softmax expects [batch x C] with C >= 2");
  const std::size_t rows = lv.rows(), c = lv.cols();
  std::vector<double> out(lv.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = lv.values().data() + r * c;
    double* o = out.data() + r * c;
    const double mx = *std::max_element(in, in + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += (o[j] = std::exp(in[j] - mx));
    for (std::size_t j = 0; j < c; ++j) o[j] /= z;
  }
  const std::size_t iself = g.size();
  return g.record(OpKind::softmax, make(OpKind::softmax, lv.shape(), std::move(out)), {logits.id},
                  [iself, rows, c](const Graph& gr, std::span<const double> up,
                                   std::span<std::vector<double>* const> grads) {
                    if (!grads[0]) return;
                    const auto y = val(gr, iself).values();
                    for (std::size_t r = 0; r < rows; ++r) {
                      double dot = 0.0;
                      for (std::size_t j = 0; j < c; ++j) dot += up[r * c + j] * y[r * c + j];
                      for (std::size_t j = 0; j < c; ++j) {
                        (*grads[0])[r * c + j] += y[r * c + j] * (up[r * c + j] - dot);
                      }
                    }
                  });
}

Var cross_entropy(Var probs, std::span<const int> labels) {
  Graph& g = graph_of(probs);
  const Tensor& pv = g.value(probs);
  const std::size_t c = check_labels(OpKind::cross_entropy, pv, labels);
  double loss = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const double p = pv[r * c + static_cast<std::size_t>(labels[r])];
    if (!(p > 0.0)) throw NumericError("cross_entropy: log of non-positive probability");
    loss -= std::log(p);
  }
  std::vector<int> ys(labels.begin(), labels.end());
  const std::size_t ip = probs.id;
  return g.record(OpKind::cross_entropy, make(OpKind::cross_entropy, {}, {loss}), {ip},
                  [ip, c, ys = std::move(ys)](const Graph& gr, std::span<const double> up,
                                              std::span<std::vector<double>* const> grads) {
                    if (!grads[0]) return;
                    const Tensor& p = val(gr, ip);
                    for (std::size_t r = 0; r < ys.size(); ++r) {
                      const std::size_t j = r * c + static_cast<std::size_t>(ys[r]);
                      (*grads[0])[j] -= up[0] / p[j];
                    }
                  });
}

Var cross_entropy(Var probs, const Tensor& target) {
  Graph& g = graph_of(probs);
  const Tensor& pv = g.value(probs);
  if (pv.shape() != target.shape()) {
    throw ShapeError("cross_entropy: target shape " + to_string(target.shape()) + " vs " + to_string(pv.shape()));
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (target[i] < 0.0) throw ConfigError("cross_entropy: negative target weight");
    if (target[i] == 0.0) continue;
    if (!(pv[i] > 0.0)) throw NumericError("cross_entropy: log of non-positive probability");
    loss -= target[i] * std::log(pv[i]);
  }
  const std::size_t ip = probs.id;
  return g.record(OpKind::cross_entropy, make(OpKind::cross_entropy, {}, {loss}), {ip},
                  [ip, target](const Graph& gr, std::span<const double> up,
                               std::span<std::vector<double>* const> grads) {
                    if (!grads[0]) return;
                    const Tensor& p = val(gr, ip);
                    for (std::size_t i = 0; i < p.size(); ++i) {
                      if (target[i] != 0.0) (*grads[0])[i] -= up[0] * target[i] / p[i];
                    }
                  });
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels) {
  Graph& g = graph_of(logits);
  const Tensor& lv = g.value(logits);
  const std::size_t c = check_labels(OpKind::softmax_cross_entropy, lv, labels);
  std::vector<double> probs(lv.size());
  double loss = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const double* in = lv.values().data() + r * c;
    double* o = probs.data() + r * c;
    const double mx = *std::max_element(in, in + c);
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += (o[j] = std::exp(in[j] - mx));
    for (std::size_t j = 0; j < c; ++j) o[j] /= z;
    loss += std::log(z) + mx - in[labels[r]];
  }
  std::vector<int> ys(labels.begin(), labels.end());
  return g.record(OpKind::softmax_cross_entropy, make(OpKind::softmax_cross_entropy, {}, {loss}), {logits.id},
                  [c, ys = std::move(ys), probs = std::move(probs)](const Graph&, std::span<const double> up,
                                                                    std::span<std::vector<double>* const> grads) {
                    if (!grads[0]) return;
                    auto& d = *grads[0];
                    for (std::size_t i = 0; i < probs.size(); ++i) d[i] += up[0] * probs[i];
                    for (std::size_t r = 0; r < ys.size(); ++r) d[r * c + static_cast<std::size_t>(ys[r])] -= up[0];
                  });
}

Var squared_error(Var prediction, Var target) {
  Graph& g = graph_of(prediction, target);
  const Tensor& pv = g.value(prediction);
  const Tensor& tv = g.value(target);
  if (pv.shape() != tv.shape()) {
    throw ShapeError("squared_error: shapes " + to_string(pv.shape()) + " and " + to_string(tv.shape()));
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double d = pv[i] - tv[i];
    loss += d * d;
  }
  const std::size_t ip = prediction.id, it = target.id;
  return g.record(OpKind::squared_error, make(OpKind::squared_error, {}, {loss}), {ip, it},
                  [ip, it](const Graph& gr, std::span<const double> up, std::span<std::vector<double>* const> grads) {
                    const Tensor& p = val(gr, ip);
                    const Tensor& t = val(gr, it);
                    for (std::size_t i = 0; i < p.size(); ++i) {
                      const double d = 2.0 * (p[i] - t[i]) * up[0];
                      if (grads[0]) (*grads[0])[i] += d;
                      if (grads[1]) (*grads[1])[i] -= d;
                    }
                  });
}

Var bce(Var probs, const Tensor& target) {
  Graph& g = graph_of(probs);
  const Tensor& pv = g.value(probs);
  if (pv.shape() != target.shape()) {
    throw ShapeError("bce: target shape " + to_string(target.shape()) + " vs " + to_string(pv.shape()));
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double p = pv[i], t = target[i];
    if (t < 0.0 || t > 1.0) throw ConfigError("bce: target outside [0, 1]");
    if (t > 0.0) {
      if (!(p > 0.0)) throw NumericError("bce: log of non-positive probability");
      loss -= t * std::log(p);
    }
    if (t < 1.0) {
      if (!(p < 1.0)) throw NumericError("bce: log of non-positive complement probability");
      loss -= (1.0 - t) * std::log1p(-p);
    }
  }
  const std::size_t ip = probs.id;
  return g.record(OpKind::bce, make(OpKind::bce, {}, {loss}), {ip},
                  [ip, target](const Graph& gr, std::span<const double> up,
                               std::span<std::vector<double>* const> grads) {
                    if (!grads[0]) return;
                    const Tensor& p = val(gr, ip);
                    for (std::size_t i = 0; i < p.size(); ++i) {
                      const double t = target[i];
                      double d = 0.0;
                      if (t > 0.0) d -= t / p[i];
                      if (t < 1.0) d += (1.0 - t) / (1.0 - p[i]);
                      (*grads[0])[i] += up[0] * d;
                    }
                  });
}

Var gaussian_kl(Var mu, Var logvar) {
  Graph& g = graph_of(mu, logvar);
  const Tensor& m = g.value(mu);
  const Tensor& lv = g.value(logvar);
  if (m.shape() != lv.shape()) {
    throw ShapeError("gaussian_kl: shapes " + to_string(m.shape()) + " and " + to_string(lv.shape()));
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) loss += m[i] * m[i] + std::exp(lv[i]) - lv[i] - 1.0;
  loss *= 0.5;
  const std::size_t im = mu.id, il = logvar.id;
  return g.record(OpKind::gaussian_kl, make(OpKind::gaussian_kl, {}, {loss}), {im, il},
                  [im, il](const Graph& gr, std::span<const double> up, std::span<std::vector<double>* const> grads) {
                    const Tensor& m = val(gr, im);
                    const Tensor& lv = val(gr, il);
                    for (std::size_t i = 0; i < m.size(); ++i) {
                      if (grads[0]) (*grads[0])[i] += up[0] * m[i];
                      if (grads[1]) (*grads[1])[i] += up[0] * 0.5 * (std::exp(lv[i]) - 1.0);
                    }
                  });
}

}  // namespace xgem::nd
