#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgem/audit/confounding.hpp"
#include "xgem/audit/oracle.hpp"
#include "xgem/data/attributed.hpp"
#include "xgem/exemplar/xgem.hpp"
#include "xgem/nn/train.hpp"
#include "xgem/nn/vae.hpp"

namespace xgem::experiments {

/// Two classifiers on the procedural attributed images: f1 trained where label
/// and attribute are independent (rho = 0), f2 where they always agree
/// (rho = 1). Both are audited on the same rho = 0 validation split with one
/// VAE and one recalibrated attribute oracle.
struct BiasAuditConfig {
  std::uint64_t seed = 1;
  data::AttributedConfig data{16, 2000, 0.0, 0.05, 2, 0.35, 0.65, 0.9, 0};  // rho is set per split
  std::size_t validation_size = 1000;
  nn::VaeSpec vae{256, 4, {128}, nn::Activation::relu, nn::DecoderOutput::sigmoid, 1.0};
  nn::TrainConfig vae_train{30, 32, 1e-3};
  double gate_threshold = 0.1;
  nn::MlpSpec classifier{{256, 32, 2}, {nn::Activation::relu}, nn::OutputHead::softmax};
  nn::TrainConfig classifier_train{20, 32, 1e-3};
  nn::MlpSpec oracle{{256, 32, 2}, {nn::Activation::relu}, nn::OutputHead::softmax};
  nn::TrainConfig oracle_train{20, 32, 1e-3};
  /// Oracle training rows taken from the rho = 0 split; 0 means all of them.
  std::size_t oracle_train_size = 0;
  audit::RecalibrationConfig recalibration;
  exemplar::XGemConfig xgem{10.0, 0.02, 300, 0.5, 1e-7};
  std::size_t audit_samples = 100;  // leading validation records
  double delta = 0.25;
  std::size_t threads = 1;

  void resolve();
};

void to_json(nlohmann::json& j, const BiasAuditConfig& c);
void from_json(const nlohmann::json& j, BiasAuditConfig& c);

struct BiasAuditReport {
  audit::Recalibration recalibration;
  audit::ConfoundingReport unbiased;  // f1
  audit::ConfoundingReport biased;    // f2
  std::vector<exemplar::BatchItem> unbiased_items;
  std::vector<exemplar::BatchItem> biased_items;
  double reconstruction_error = 0.0;
  double unbiased_accuracy = 0.0;  // on the validation split
  double biased_accuracy = 0.0;
  double oracle_base_accuracy = 0.0;

  nlohmann::json summary() const;
};

/// Trains every model, recalibrates the oracle, traverses the audit samples
/// under both classifiers and measures confounding. The source label of each
/// traversal is the audited classifier's own prediction; the target is the
/// other class. Writes tables, exemplar strips and a manifest when `out` is set.
BiasAuditReport run_bias_audit(BiasAuditConfig cfg, const std::optional<std::filesystem::path>& out = std::nullopt);

}  // namespace xgem::experiments
