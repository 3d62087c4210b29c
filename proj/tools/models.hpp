#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "xgem/adversarial/pgd.hpp"
#include "xgem/data/dataset.hpp"
#include "xgem/exemplar/xgem.hpp"
#include "xgem/nn/train.hpp"
#include "xgem/nn/vae.hpp"

namespace xgem::tools {

/// What `train` fits: a dataset source plus one VAE and one classifier.
///
///   data.kind = "parabola"   (ParabolaConfig fields)
///             | "attributed" (AttributedConfig fields)
///             | "idx"        ({"images", "labels", "limit"})
struct TrainJob {
  std::uint64_t seed = 1;
  nlohmann::json data = {{"kind", "parabola"}};
  nn::VaeSpec vae{2, 1, {32, 32}, nn::Activation::tanh, nn::DecoderOutput::linear, 0.005};
  nn::TrainConfig vae_train{200, 32, 3e-3};
  nn::MlpSpec classifier{{2, 16, 2}, {nn::Activation::tanh}, nn::OutputHead::softmax};
  nn::TrainConfig classifier_train{10, 32, 1e-2};
  double gate_threshold = 0.05;
};

TrainJob parse_train_job(const nlohmann::json& j, const std::optional<std::uint64_t>& seed);

/// Trains, certifies and writes `vae.ckpt`, `classifier.ckpt`, `data/` and
/// `models.json` under `out`. Throws GateError when the VAE misses its gate.
nlohmann::json run_train(const TrainJob& job, const std::filesystem::path& out);

/// Loads a `train` output directory and traverses its first `rows` records
/// towards the other class. Writes one trajectory CSV per row plus a table.
nlohmann::json run_model_xgem(const std::filesystem::path& models, const exemplar::XGemConfig& cfg, std::size_t rows,
                              const std::filesystem::path& out);

/// PGD on the first `rows` records of a `train` output directory.
nlohmann::json run_model_attack(const std::filesystem::path& models, const adversarial::AttackConfig& cfg,
                                std::size_t rows, const std::filesystem::path& out);

}  // namespace xgem::tools
