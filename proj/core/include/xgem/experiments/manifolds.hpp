#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgem/analytics/histogram.hpp"
#include "xgem/analytics/manifold.hpp"
#include "xgem/analytics/reliability.hpp"
#include "xgem/data/attributed.hpp"
#include "xgem/exemplar/xgem.hpp"
#include "xgem/nn/train.hpp"
#include "xgem/nn/vae.hpp"

namespace xgem::experiments {

struct Architecture {
  std::string name;
  nn::MlpSpec spec;
};

void to_json(nlohmann::json& j, const Architecture& a);
void from_json(const nlohmann::json& j, Architecture& a);

/// Confidence along xGEM trajectories for two classifier architectures, each
/// snapshotted at several training epochs.
struct ConfidenceManifoldsConfig {
  std::uint64_t seed = 1;
  data::AttributedConfig data{16, 2000, 0.0, 0.05, 2, 0.35, 0.65, 0.9, 0};
  std::size_t validation_size = 500;
  nn::VaeSpec vae{256, 4, {128}, nn::Activation::relu, nn::DecoderOutput::sigmoid, 1.0};
  nn::TrainConfig vae_train{30, 32, 1e-3};
  double gate_threshold = 0.1;
  std::vector<Architecture> architectures{
      {"narrow", {{256, 8, 2}, {nn::Activation::relu}, nn::OutputHead::softmax}},
      {"wide", {{256, 64, 64, 2}, {nn::Activation::relu, nn::Activation::relu}, nn::OutputHead::softmax}}};
  nn::TrainConfig classifier_train{20, 32, 1e-3};
  std::vector<std::size_t> checkpoints{2, 10, 20};  // epochs, all <= classifier_train.epochs
  exemplar::XGemConfig xgem{10.0, 0.02, 300, 0.5, 1e-7};
  std::size_t samples = 40;  // leading validation records
  analytics::HistogramSpec histogram;
  std::size_t reliability_bins = 10;
  std::size_t threads = 1;

  void resolve();
};

void to_json(nlohmann::json& j, const ConfidenceManifoldsConfig& c);
void from_json(const nlohmann::json& j, ConfidenceManifoldsConfig& c);

/// Everything computed for one (architecture, checkpoint).
struct ModelManifolds {
  std::string architecture;
  std::size_t epoch = 0;
  double accuracy = 0.0;  // validation
  std::vector<analytics::ConfidenceManifold> manifolds;
  std::vector<analytics::LogisticFit> fits;
  std::vector<analytics::ConfidenceManifold> aligned;  // non-degenerate fits only
  std::vector<analytics::LogisticFit> aligned_refits;
  std::map<analytics::Stratum, analytics::Histogram2d> histograms;
  analytics::ReliabilityReport reliability;
  std::size_t degenerate = 0;
  std::size_t failed = 0;  // traversals that threw
  double mean_k = 0.0;     // non-degenerate fits
  double monotone_fraction = 0.0;  // manifolds non-increasing after smoothing

  std::string id() const { return architecture + "_e" + std::to_string(epoch); }
};

struct ManifoldsReport {
  std::vector<ModelManifolds> models;
  double reconstruction_error = 0.0;
  double max_aligned_x0 = 0.0;  // over every refit of an aligned manifold

  nlohmann::json summary() const;
};

/// Fraction of manifolds whose confidence, after a centred moving average of
/// width `window`, never rises by more than `slack` from one point to the next.
double monotone_fraction(const std::vector<analytics::ConfidenceManifold>& ms, std::size_t window = 5,
                         double slack = 0.02);

ManifoldsReport run_confidence_manifolds(ConfidenceManifoldsConfig cfg,
                                         const std::optional<std::filesystem::path>& out = std::nullopt);

}  // namespace xgem::experiments
