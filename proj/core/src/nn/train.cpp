#include "xgem/nn/train.hpp"

#include <algorithm>
#include <cmath>

#include "xgem/error.hpp"
#include "xgem/random.hpp"

namespace xgem::nn {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "sgd"; }

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::adam;
  if (name == "sgd") return OptimizerKind::sgd;
  throw ConfigError("unknown optimizer '" + name + "'");
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (optimizer == OptimizerKind::adam) {
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) throw ConfigError("adam betas lie in (0, 1)");
    if (!(epsilon > 0.0)) throw ConfigError("adam epsilon must be positive");
  }
}

void Optimizer::step(std::vector<nd::Tensor>& params, std::span<const nd::Tensor> grads) {
  if (grads.size() != params.size()) throw ShapeError("optimizer: gradient count mismatch");
  ++t_;
  if (cfg_.optimizer == OptimizerKind::adam && m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const nd::Shape shape = params[i].shape();
    std::vector<double> w = std::move(params[i]).release();
    const auto g = grads[i].values();
    if (cfg_.optimizer == OptimizerKind::sgd) {
      for (std::size_t j = 0; j < w.size(); ++j) w[j] -= cfg_.learning_rate * g[j];
    } else {
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t j = 0; j < w.size(); ++j) {
        m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
        v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
        w[j] -= cfg_.learning_rate * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg_.epsilon);
      }
    }
    params[i] = nd::Tensor(shape, std::move(w));
  }
}

namespace {

void check_features(const nd::Tensor& features, std::size_t width) {
  if (features.rank() != 2 || features.rows() == 0) throw ConfigError("training needs a non-empty [n x d] dataset");
  if (features.cols() != width) {
    throw ShapeError("dataset width " + std::to_string(features.cols()) + " does not match model input " +
                     std::to_string(width));
  }
}

std::vector<int> gather(std::span<const int> labels, std::span<const std::size_t> idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = labels[idx[i]];
  return out;
}

}  // namespace

ClassifierEpoch evaluate_classifier(const Classifier& clf, const nd::Tensor& features, std::span<const int> labels) {
  nd::Graph g;
  const nd::Var logits = clf.logits(g.constant(features));
  const nd::Var loss = nd::softmax_cross_entropy(logits, labels);
  const nd::Tensor& lv = g.value(logits);
  const std::size_t c = clf.class_count();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (static_cast<int>(nd::argmax(lv.values().subspan(i * c, c))) == labels[i]) ++correct;
  }
  const double n = static_cast<double>(labels.size());
  return {0, g.value(loss).item() / n, static_cast<double>(correct) / n};
}

TrainedClassifier train_classifier(const nd::Tensor& features, std::span<const int> labels, const MlpSpec& spec,
                                   const TrainConfig& cfg, const EpochCallback& on_epoch) {
  spec.validate();
  cfg.validate();
  if (spec.head != OutputHead::softmax) throw ConfigError("train_classifier needs a softmax head");
  check_features(features, spec.input_dim());
  if (labels.size() != features.rows()) throw ShapeError("label count does not match dataset size");
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= spec.output_dim()) {
      throw ConfigError("label " + std::to_string(y) + " outside [0, " + std::to_string(spec.output_dim()) + ")");
    }
  }

  Rng rng(cfg.seed);
  Mlp net = Mlp::initialize(spec, rng);
  std::vector<nd::Tensor> params = net.parameters();
  Optimizer opt(cfg);
  std::vector<ClassifierEpoch> history;
  const std::size_t n = features.rows();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = permutation(n, rng);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, n - start);
      const std::span<const std::size_t> idx(order.data() + start, count);
      const auto ys = gather(labels, idx);

      nd::Graph g;
      std::vector<nd::Var> vars;
      for (const auto& p : params) vars.push_back(g.parameter(p));
      const nd::Var x = g.constant(features.gather_rows(idx));
      const nd::Var loss = nd::softmax_cross_entropy(net.forward(x, vars), ys) * (1.0 / static_cast<double>(count));
      g.backward(loss);
      std::vector<nd::Tensor> grads;
      for (auto v : vars) grads.push_back(g.grad(v));
      opt.step(params, grads);
    }
    net = Mlp(spec, params);
    Classifier snapshot(net);
    ClassifierEpoch stats = evaluate_classifier(snapshot, features, labels);
    stats.epoch = epoch;
    history.push_back(stats);
    if (on_epoch) on_epoch(stats, snapshot);
  }
  return {Classifier(std::move(net)), std::move(history)};
}

TrainedVae train_vae(const nd::Tensor& features, const VaeSpec& spec, const TrainConfig& cfg) {
  spec.validate();
  cfg.validate();
  check_features(features, spec.data_dim);

  Rng rng(cfg.seed);
  Vae vae = Vae::initialize(spec, rng);
  std::vector<nd::Tensor> params = vae.parameters();
  Optimizer opt(cfg);
  std::vector<VaeEpoch> history;
  const std::size_t n = features.rows();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = permutation(n, rng);
    double recon_total = 0.0, kl_total = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, n - start);
      const std::span<const std::size_t> idx(order.data() + start, count);

      nd::Graph g;
      std::vector<nd::Var> vars;
      for (const auto& p : params) vars.push_back(g.parameter(p));
      const nd::Var x = g.constant(features.gather_rows(idx));
      const Posterior post = vae.encode(x, vars);
      const nd::Var eps = g.constant(normal_tensor({count, spec.latent_dim}, rng));
      const nd::Var z = post.mu + nd::exp(post.logvar * 0.5) * eps;
      const nd::Var recon = nd::squared_error(vae.decode(z, vars), x);
      const nd::Var kl = nd::gaussian_kl(post.mu, post.logvar);
      const nd::Var loss = (recon + kl * spec.kl_weight) * (1.0 / static_cast<double>(count));
      g.backward(loss);
      recon_total += g.value(recon).item();
      kl_total += g.value(kl).item();
      std::vector<nd::Tensor> grads;
      for (auto v : vars) grads.push_back(g.grad(v));
      opt.step(params, grads);
    }
    vae = Vae(spec, params);
    const double nn = static_cast<double>(n);
    history.push_back({epoch, recon_total / nn, kl_total / nn, (recon_total + spec.kl_weight * kl_total) / nn});
  }
  return {std::move(vae), std::move(history)};
}

}  // namespace xgem::nn
