#pragma once

#include <cstddef>
#include <vector>

#include "xgem/nn/generator.hpp"
#include "xgem/nn/mlp.hpp"

namespace xgem::nn {

enum class DecoderOutput { linear, sigmoid };

std::string to_string(DecoderOutput o);
DecoderOutput decoder_output_from_string(const std::string& name);

struct VaeSpec {
  std::size_t data_dim = 0;
  std::size_t latent_dim = 0;
  /// Encoder hidden widths, input side first. The decoder mirrors them.
  std::vector<std::size_t> hidden;
  Activation activation = Activation::relu;
  DecoderOutput output = DecoderOutput::linear;
  /// Weight of the KL term against the summed squared reconstruction error.
  double kl_weight = 1.0;

  void validate() const;
  friend bool operator==(const VaeSpec&, const VaeSpec&) = default;
};

/// Expected parameter shapes, in storage order:
/// encoder trunk (W, b)..., mu head (W, b), log-variance head (W, b),
/// decoder hidden (W, b)..., decoder output (W, b).
std::vector<nd::Shape> vae_parameter_shapes(const VaeSpec& spec);

struct Posterior {
  nd::Var mu;
  nd::Var logvar;
};

/// Gaussian-posterior autoencoder; the shipped Generator implementation.
class Vae final : public Generator {
 public:
  Vae(VaeSpec spec, std::vector<nd::Tensor> parameters);
  static Vae initialize(VaeSpec spec, Rng& rng);

  const VaeSpec& spec() const noexcept { return spec_; }
  const std::vector<nd::Tensor>& parameters() const noexcept { return params_; }

  std::size_t latent_dim() const override { return spec_.latent_dim; }
  std::size_t data_dim() const override { return spec_.data_dim; }

  nd::Tensor encode(const nd::Tensor& x) const override;
  nd::Tensor decode(const nd::Tensor& z) const override;
  nd::Var decode(nd::Var z) const override;

  std::vector<nd::Var> bind(nd::Graph& graph, bool trainable) const;
  Posterior encode(nd::Var x, std::span<const nd::Var> params) const;
  nd::Var decode(nd::Var z, std::span<const nd::Var> params) const;

 private:
  VaeSpec spec_;
  std::vector<nd::Tensor> params_;
};

}  // namespace xgem::nn
