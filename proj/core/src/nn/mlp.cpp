#include "xgem/nn/mlp.hpp"

#include <cmath>

#include "xgem/error.hpp"

namespace xgem::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::identity: return "identity";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "identity" || name == "linear") return Activation::identity;
  throw ConfigError("unknown activation '" + name + "'");
}

std::string to_string(OutputHead h) { return h == OutputHead::softmax ? "softmax" : "linear"; }

OutputHead head_from_string(const std::string& name) {
  if (name == "softmax") return OutputHead::softmax;
  if (name == "linear") return OutputHead::linear;
  throw ConfigError("unknown output head '" + name + "'");
}

nd::Var activate(nd::Var x, Activation a) {
  switch (a) {
    case Activation::relu: return nd::relu(x);
    case Activation::tanh: return nd::tanh(x);
    case Activation::sigmoid: return nd::sigmoid(x);
    case Activation::identity: return x;
  }
  return x;
}

nd::Var dense(nd::Var x, nd::Var weight, nd::Var bias) {
  nd::Graph& g = *x.graph;
  const std::size_t n = g.value(x).rows();
  nd::Var ones = g.constant(nd::Tensor::filled({n, 1}, 1.0));
  return nd::matmul(x, weight) + nd::matmul(ones, bias);
}

void MlpSpec::validate() const {
  if (widths.size() < 2) throw ConfigError("MlpSpec needs at least input and output widths");
  for (auto w : widths) {
    if (w == 0) throw ConfigError("MlpSpec widths must be positive");
  }
  if (activations.size() != widths.size() - 2) {
    throw ConfigError("MlpSpec needs one activation per hidden layer (" + std::to_string(widths.size() - 2) +
                      "), got " + std::to_string(activations.size()));
  }
  for (auto a : activations) {
    if (a != Activation::relu && a != Activation::tanh) throw ConfigError("hidden activations are relu or tanh");
  }
  if (head == OutputHead::softmax && output_dim() < 2) throw ConfigError("softmax head needs at least 2 classes");
}

std::vector<nd::Tensor> glorot_layers(std::span<const std::size_t> widths, Rng& rng) {
  std::vector<nd::Tensor> params;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l], out = widths[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    params.push_back(uniform_tensor({in, out}, rng, -limit, limit));
    params.push_back(nd::Tensor::zeros({1, out}));
  }
  return params;
}

Mlp::Mlp(MlpSpec spec, std::vector<nd::Tensor> parameters) : spec_(std::move(spec)), params_(std::move(parameters)) {
  spec_.validate();
  const std::size_t layers = spec_.widths.size() - 1;
  if (params_.size() != 2 * layers) {
    throw ShapeError("Mlp expects " + std::to_string(2 * layers) + " parameter tensors, got " +
                     std::to_string(params_.size()));
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const nd::Shape w{spec_.widths[l], spec_.widths[l + 1]};
    const nd::Shape b{1, spec_.widths[l + 1]};
    if (params_[2 * l].shape() != w || params_[2 * l + 1].shape() != b) {
      throw ShapeError("Mlp layer " + std::to_string(l) + " parameters do not match its widths");
    }
  }
}

Mlp Mlp::initialize(MlpSpec spec, Rng& rng) {
  spec.validate();
  auto params = glorot_layers(spec.widths, rng);
  if (spec.head == OutputHead::softmax) {
    // Small final layer: an untrained classifier starts close to uniform.
    auto& w = params[params.size() - 2];
    std::vector<double> shrunk(w.values().begin(), w.values().end());
    for (auto& v : shrunk) v *= 0.1;
    w = nd::Tensor(w.shape(), std::move(shrunk));
  }
  return Mlp(std::move(spec), std::move(params));
}

std::vector<nd::Var> Mlp::bind(nd::Graph& graph, bool trainable) const {
  std::vector<nd::Var> vars;
  vars.reserve(params_.size());
  for (const auto& p : params_) vars.push_back(trainable ? graph.parameter(p) : graph.constant(p));
  return vars;
}

nd::Var Mlp::forward(nd::Var x, std::span<const nd::Var> params) const {
  const std::size_t layers = spec_.widths.size() - 1;
  nd::Var h = x;
  for (std::size_t l = 0; l < layers; ++l) {
    h = dense(h, params[2 * l], params[2 * l + 1]);
    if (l + 1 < layers) h = activate(h, spec_.activations[l]);
  }
  return h;
}

}  // namespace xgem::nn
