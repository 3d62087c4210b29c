#include "xgem/nn/classifier.hpp"

#include "xgem/error.hpp"

namespace xgem::nn {

Classifier::Classifier(Mlp net) : net_(std::move(net)) {
  if (net_.spec().head != OutputHead::softmax) throw ConfigError("a classifier needs a softmax head");
}

Classifier Classifier::initialize(MlpSpec spec, Rng& rng) {
  spec.head = OutputHead::softmax;
  return Classifier(Mlp::initialize(std::move(spec), rng));
}

nd::Var Classifier::logits(nd::Var x) const {
  const auto params = net_.bind(*x.graph, false);
  return net_.forward(x, params);
}

nd::Tensor Classifier::as_batch(const nd::Tensor& x) const {
  const std::size_t d = input_dim();
  if (x.rank() == 1 && x.size() == d) return x.reshaped({1, d});
  if (x.rank() == 2 && x.cols() == d) return x;
  throw ShapeError("classifier expects inputs of width " + std::to_string(d) + ", got " + nd::to_string(x.shape()));
}

nd::Tensor Classifier::predict_proba(const nd::Tensor& x) const {
  nd::Graph g;
  const nd::Var out = nd::softmax(logits(g.constant(as_batch(x))));
  const nd::Tensor& p = g.value(out);
  return x.rank() == 1 ? p.reshaped({class_count()}) : p;
}

std::vector<int> Classifier::predict(const nd::Tensor& x) const {
  const nd::Tensor p = predict_proba(x);
  const std::size_t c = class_count();
  const std::size_t n = p.size() / c;
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(nd::argmax(p.values().subspan(i * c, c)));
  }
  return labels;
}

Classifier Classifier::with_logit_scale(double factor) const {
  if (!(factor > 0.0)) throw ConfigError("logit scale must be positive");
  auto params = net_.parameters();
  for (std::size_t i = params.size() - 2; i < params.size(); ++i) {
    std::vector<double> v(params[i].values().begin(), params[i].values().end());
    for (auto& x : v) x *= factor;
    params[i] = nd::Tensor(params[i].shape(), std::move(v));
  }
  return Classifier(Mlp(net_.spec(), std::move(params)));
}

}  // namespace xgem::nn
