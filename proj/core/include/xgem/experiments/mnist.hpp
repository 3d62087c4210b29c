#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgem/exemplar/xgem.hpp"
#include "xgem/nn/train.hpp"
#include "xgem/nn/vae.hpp"

namespace xgem::experiments {

struct DigitPair {
  int source = 0;
  int target = 0;
};

void to_json(nlohmann::json& j, const DigitPair& p);
void from_json(const nlohmann::json& j, DigitPair& p);

/// VAE + softmax classifier on an IDX digit set. The first `train_size` rows
/// train both models; sources are drawn from the rows after them.
struct MnistXgemConfig {
  std::uint64_t seed = 1;
  std::filesystem::path images = "data/mnist/train-images-idx3-ubyte";
  std::filesystem::path labels = "data/mnist/train-labels-idx1-ubyte";
  std::size_t train_size = 10000;
  std::size_t holdout_size = 1000;
  std::size_t latent_dim = 20;
  std::vector<std::size_t> vae_hidden{256};
  nn::TrainConfig vae_train{15, 64, 1e-3};
  double gate_threshold = 0.25;
  std::vector<std::size_t> classifier_hidden{128};
  nn::TrainConfig classifier_train{5, 64, 1e-3};
  exemplar::XGemConfig xgem{10.0, 0.05, 500, 0.5, 1e-7};
  std::vector<DigitPair> pairs{{0, 6}, {1, 7}, {2, 3}, {3, 8}, {4, 9}, {5, 6}, {6, 0}, {7, 1}, {8, 3}, {9, 4}};
  std::size_t frames = 8;  // trajectory cells per strip, source excluded
  std::size_t threads = 1;

  /// Seeds and static checks; file contents are checked when loaded.
  void resolve();
};

void to_json(nlohmann::json& j, const MnistXgemConfig& c);
void from_json(const nlohmann::json& j, MnistXgemConfig& c);

/// True when both IDX files named by `cfg` exist.
bool mnist_available(const MnistXgemConfig& cfg);

struct MnistPairResult {
  DigitPair pair;
  std::size_t row = 0;  // holdout row used as the source
  std::optional<exemplar::XGemResult> result;
  std::string error;
  int exemplar_label = -1;
  double exemplar_confidence = 0.0;  // classifier probability of the target
  bool success = false;              // exemplar_label == target at confidence >= 0.5
};

struct MnistReport {
  std::vector<MnistPairResult> pairs;
  double reconstruction_error = 0.0;
  double classifier_accuracy = 0.0;  // on the holdout rows
  std::size_t successes = 0;

  nlohmann::json summary() const;
};

/// Throws FormatError for unreadable IDX files and ConfigError when a
/// configured source digit has no correctly classified holdout record.
MnistReport run_mnist_xgem(MnistXgemConfig cfg, const std::optional<std::filesystem::path>& out = std::nullopt);

}  // namespace xgem::experiments
