#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgem/adversarial/pgd.hpp"
#include "xgem/data/parabola.hpp"
#include "xgem/exemplar/xgem.hpp"
#include "xgem/nn/train.hpp"
#include "xgem/nn/vae.hpp"

namespace xgem::experiments {

/// Two-dimensional world: points on a parabola, a 1-d latent VAE and a
/// softmax classifier split at the vertex.
struct ParabolaFig1Config {
  std::uint64_t seed = 1;
  data::ParabolaConfig data{1000, -1.5, 1.5, 0.0, 0.0, 0};
  nn::VaeSpec vae{2, 1, {32, 32}, nn::Activation::tanh, nn::DecoderOutput::linear, 0.005};
  nn::TrainConfig vae_train{200, 32, 3e-3};
  nn::MlpSpec classifier{{2, 16, 2}, {nn::Activation::tanh}, nn::OutputHead::softmax};
  nn::TrainConfig classifier_train{10, 32, 1e-2};
  double gate_threshold = 0.05;
  exemplar::XGemConfig xgem{2.0, 0.003, 5000, 0.5, 1e-9};
  adversarial::AttackConfig attack{0.5, 20, 0.05};
  std::size_t pairs = 24;  // class-1 samples traversed, in dataset order

  /// Fills every stream seed from `seed` and validates all sections.
  void resolve();
};

void to_json(nlohmann::json& j, const ParabolaFig1Config& c);
void from_json(const nlohmann::json& j, ParabolaFig1Config& c);

struct ParabolaWorld {
  data::Dataset data;
  std::shared_ptr<const nn::Vae> vae;
  nn::CertifiedGenerator generator;
  nn::Classifier classifier;
  double latent_min = 0.0;  // range of encode() over the training set
  double latent_max = 0.0;
  double classifier_accuracy = 0.0;
};

/// Generates data and trains both models. Throws GateError when the VAE
/// misses `gate_threshold`. Expects a resolved config.
ParabolaWorld build_parabola_world(const ParabolaFig1Config& cfg);

struct Fig1Pair {
  std::size_t index = 0;  // row in the dataset
  exemplar::XGemResult xgem;
  adversarial::AttackResult attack;
  double xgem_max_distance = 0.0;      // worst trajectory point vs the curve
  double adversarial_distance = 0.0;   // attack endpoint vs the curve
};

struct Fig1Report {
  std::vector<Fig1Pair> pairs;
  double reconstruction_error = 0.0;
  double classifier_accuracy = 0.0;
  double decode_grid_max_distance = 0.0;  // 2001-point sweep over the latent range
  double max_xgem_distance = 0.0;
  double fraction_adversarial_farther = 0.0;  // 0 when there are no pairs

  nlohmann::json summary() const;
};

/// Resolves `cfg`, runs the comparison, and, when `out` is set, writes the
/// pair table, every trajectory, the decoded curve, the figure and a manifest.
Fig1Report run_parabola_fig1(ParabolaFig1Config cfg, const std::optional<std::filesystem::path>& out = std::nullopt);

}  // namespace xgem::experiments
