#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "xgem/nd/tensor.hpp"
#include "xgem/nn/classifier.hpp"
#include "xgem/nn/vae.hpp"

namespace xgem::nn {

enum class OptimizerKind { sgd, adam };

std::string to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(const std::string& name);

struct TrainConfig {
  std::size_t epochs = 20;  // 0 returns the initialized model
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Determines initialization, batch order and reparameterization noise.
  std::uint64_t seed = 0;

  void validate() const;
};

/// In-place first-order update over a parameter list.
class Optimizer {
 public:
  explicit Optimizer(const TrainConfig& cfg) : cfg_(cfg) {}
  void step(std::vector<nd::Tensor>& params, std::span<const nd::Tensor> grads);

 private:
  TrainConfig cfg_;
  std::size_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

struct ClassifierEpoch {
  std::size_t epoch = 0;
  double loss = 0.0;      // mean cross entropy over the training set after the epoch
  double accuracy = 0.0;  // training accuracy after the epoch
};

struct VaeEpoch {
  std::size_t epoch = 0;
  double reconstruction = 0.0;  // mean summed squared error per sample during the epoch
  double kl = 0.0;              // mean KL per sample during the epoch
  double loss = 0.0;            // reconstruction + kl_weight * kl (negative ELBO up to constants)
};

struct TrainedClassifier {
  Classifier model;
  std::vector<ClassifierEpoch> history;
};

struct TrainedVae {
  Vae model;
  std::vector<VaeEpoch> history;
};

/// Invoked after every epoch with the model as it stands; used for snapshots.
using EpochCallback = std::function<void(const ClassifierEpoch&, const Classifier&)>;

/// Minibatch cross-entropy training. A pure function of its arguments.
TrainedClassifier train_classifier(const nd::Tensor& features, std::span<const int> labels, const MlpSpec& spec,
                                   const TrainConfig& cfg, const EpochCallback& on_epoch = {});

/// Reparameterized VAE training on squared-error reconstruction + weighted KL.
TrainedVae train_vae(const nd::Tensor& features, const VaeSpec& spec, const TrainConfig& cfg);

/// Mean cross entropy and accuracy of a classifier on a labelled batch.
ClassifierEpoch evaluate_classifier(const Classifier& clf, const nd::Tensor& features, std::span<const int> labels);

}  // namespace xgem::nn
