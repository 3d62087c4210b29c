#pragma once

#include <cstddef>
#include <vector>

#include "xgem/nd/graph.hpp"
#include "xgem/nn/mlp.hpp"

namespace xgem::nn {

/// Softmax MLP classifier; the black box under explanation, and also the base
/// model of the attribute oracle. Immutable once built, so safe to share across
/// threads for inference.
class Classifier {
 public:
  explicit Classifier(Mlp net);
  static Classifier initialize(MlpSpec spec, Rng& rng);

  std::size_t input_dim() const { return net_.spec().input_dim(); }
  std::size_t class_count() const { return net_.spec().output_dim(); }
  const Mlp& network() const noexcept { return net_; }

  /// Logits for a batch Var [n x d]; parameters enter the graph as constants.
  nd::Var logits(nd::Var x) const;

  /// x of shape [d] returns [C]; x of shape [n x d] returns [n x C].
  nd::Tensor predict_proba(const nd::Tensor& x) const;
  /// Argmax labels for every row of x.
  std::vector<int> predict(const nd::Tensor& x) const;

  /// Copy whose logits are multiplied by `factor` (> 0). The argmax is unchanged.
  Classifier with_logit_scale(double factor) const;

 private:
  nd::Tensor as_batch(const nd::Tensor& x) const;

  Mlp net_;
};

}  // namespace xgem::nn
