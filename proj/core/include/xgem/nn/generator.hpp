#pragma once

#include <cstddef>
#include <memory>

#include "xgem/nd/graph.hpp"
#include "xgem/nd/tensor.hpp"

namespace xgem::nn {

/// Generator G (latent -> data) paired with its inverse map F (data -> latent).
///
/// Tensor overloads accept a single vector ([k] or [d]) or a batch
/// ([n x k] or [n x d]) and return the matching rank.
class Generator {
 public:
  virtual ~Generator() = default;

  virtual std::size_t latent_dim() const = 0;
  virtual std::size_t data_dim() const = 0;

  /// Deterministic latent code of x (no sampling).
  virtual nd::Tensor encode(const nd::Tensor& x) const = 0;
  virtual nd::Tensor decode(const nd::Tensor& z) const = 0;
  /// Differentiable decode of a [n x k] Var; generator weights are constants.
  virtual nd::Var decode(nd::Var z) const = 0;
};

/// Mean over samples of the per-sample RMS error of decode(encode(x)).
double reconstruction_error(const Generator& gen, const nd::Tensor& data);

/// A generator whose reconstruction error on a reference set was measured to
/// be below a threshold. The latent traversal only accepts certified
/// generators: if the generator does not track the data manifold, exemplars
/// drawn from it mean nothing.
class CertifiedGenerator {
 public:
  /// Throws GateError when reconstruction_error(data) >= threshold.
  static CertifiedGenerator certify(std::shared_ptr<const Generator> gen, const nd::Tensor& data, double threshold);

  const Generator& generator() const noexcept { return *gen_; }
  const Generator* operator->() const noexcept { return gen_.get(); }
  double measured_error() const noexcept { return measured_; }
  double threshold() const noexcept { return threshold_; }

 private:
  CertifiedGenerator(std::shared_ptr<const Generator> gen, double measured, double threshold)
      : gen_(std::move(gen)), measured_(measured), threshold_(threshold) {}

  std::shared_ptr<const Generator> gen_;
  double measured_;
  double threshold_;
};

}  // namespace xgem::nn
