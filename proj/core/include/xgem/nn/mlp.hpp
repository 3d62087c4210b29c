#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "xgem/nd/graph.hpp"
#include "xgem/nd/tensor.hpp"
#include "xgem/random.hpp"

namespace xgem::nn {

enum class Activation { relu, tanh, sigmoid, identity };
enum class OutputHead { softmax, linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);
std::string to_string(OutputHead h);
OutputHead head_from_string(const std::string& name);

nd::Var activate(nd::Var x, Activation a);

/// x W + b for a batch x of shape [n x in], W [in x out], b [1 x out].
/// The bias is spread over rows with a ones column so no broadcasting is needed.
nd::Var dense(nd::Var x, nd::Var weight, nd::Var bias);

/// Fully connected network layout.
struct MlpSpec {
  /// Input width, hidden widths..., output width.
  std::vector<std::size_t> widths;
  /// One entry per hidden layer (relu or tanh).
  std::vector<Activation> activations;
  OutputHead head = OutputHead::softmax;

  std::size_t input_dim() const { return widths.front(); }
  std::size_t output_dim() const { return widths.back(); }
  std::size_t hidden_layers() const { return widths.size() - 2; }
  void validate() const;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

/// Glorot-uniform weights, zero biases, appended as W0, b0, W1, b1, ...
std::vector<nd::Tensor> glorot_layers(std::span<const std::size_t> widths, Rng& rng);

/// Plain stack of dense layers. Parameters are ordered W0, b0, W1, b1, ...
class Mlp {
 public:
  Mlp(MlpSpec spec, std::vector<nd::Tensor> parameters);
  static Mlp initialize(MlpSpec spec, Rng& rng);

  const MlpSpec& spec() const noexcept { return spec_; }
  const std::vector<nd::Tensor>& parameters() const noexcept { return params_; }

  std::vector<nd::Var> bind(nd::Graph& graph, bool trainable) const;
  /// Output before the head (logits for a softmax head).
  nd::Var forward(nd::Var x, std::span<const nd::Var> params) const;

 private:
  MlpSpec spec_;
  std::vector<nd::Tensor> params_;
};

}  // namespace xgem::nn
