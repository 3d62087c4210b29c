#include "xgem/adversarial/pgd.hpp"

#include <algorithm>
#include <cmath>

#include "xgem/error.hpp"
#include "xgem/nd/graph.hpp"

namespace xgem::adversarial {

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("attack: epsilon must be >= 0");
  if (steps == 0) throw ConfigError("attack: steps must be positive");
  if (!(step_size > 0.0)) throw ConfigError("attack: step_size must be positive");
  if (epsilon > 0.0 && step_size > epsilon) throw ConfigError("attack: step_size must not exceed epsilon");
}

void to_json(nlohmann::json& j, const AttackConfig& c) {
  j = {{"epsilon", c.epsilon}, {"steps", c.steps}, {"step_size", c.step_size}, {"norm", "linf"}};
}

void from_json(const nlohmann::json& j, AttackConfig& c) {
  const AttackConfig d;
  if (j.contains("norm") && j.at("norm") != "linf") throw ConfigError("attack: only the linf norm is supported");
  c.epsilon = j.value("epsilon", d.epsilon);
  c.steps = j.value("steps", d.steps);
  c.step_size = j.value("step_size", d.step_size);
}

namespace {

struct Probe {
  double loss;
  nd::Tensor grad;
  nd::Tensor proba;
};

Probe probe(const nd::Tensor& x, int y, const nn::Classifier& clf) {
  const std::size_t d = x.size();
  nd::Graph g;
  const nd::Var xv = g.parameter(x.reshaped({1, d}));
  const nd::Var logits = clf.logits(xv);
  const int label[] = {y};
  const nd::Var loss = nd::softmax_cross_entropy(logits, label);
  g.backward(loss);
  return {g.value(loss).item(), g.grad(xv).reshaped({d}), g.value(nd::softmax(logits)).reshaped({clf.class_count()})};
}

// Clamp v into [c - eps, c + eps] so that |v - c| <= eps holds in floating
// point, not just in exact arithmetic.
double project(double v, double c, double eps) {
  v = std::clamp(v, c - eps, c + eps);
  while (v - c > eps) v = std::nextafter(v, c);
  while (c - v > eps) v = std::nextafter(v, c);
  return v;
}

}  // namespace

AttackResult pgd_attack(const nd::Tensor& x, int y, const nn::Classifier& clf, const AttackConfig& cfg) {
  cfg.validate();
  if (x.size() != clf.input_dim()) throw ShapeError("attack: input width does not match the classifier");
  if (y < 0 || static_cast<std::size_t>(y) >= clf.class_count()) throw ConfigError("attack: label out of range");
  const nd::Tensor origin = x.reshaped({x.size()});

  AttackResult out;
  nd::Tensor cur = origin;
  Probe p = probe(cur, y, clf);
  out.trajectory.push_back({0, nd::Tensor::zeros({0}), cur, p.proba, p.loss, 0.0});
  for (std::size_t it = 1; it <= cfg.steps; ++it) {
    std::vector<double> next(cur.size());
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double g = p.grad[i];
      const double sign = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
      next[i] = project(cur[i] + cfg.step_size * sign, origin[i], cfg.epsilon);
    }
    cur = nd::Tensor(origin.shape(), std::move(next));
    p = probe(cur, y, clf);
    out.trajectory.push_back({it, nd::Tensor::zeros({0}), cur, p.proba, p.loss, nd::l2_distance(cur, origin)});
  }
  out.adversarial = cur;
  return out;
}

}  // namespace xgem::adversarial
