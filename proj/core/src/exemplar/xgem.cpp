#include "xgem/exemplar/xgem.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "xgem/error.hpp"
#include "xgem/nd/graph.hpp"

namespace xgem::exemplar {

std::string to_string(ResultMode m) { return m == ResultMode::converged ? "converged" : "switch_point"; }

ResultMode result_mode_from_string(const std::string& s) {
  if (s == "switch_point") return ResultMode::switch_point;
  if (s == "converged") return ResultMode::converged;
  throw ConfigError("unknown result_mode '" + s + "'");
}

std::string to_string(TerminalStatus s) {
  switch (s) {
    case TerminalStatus::switched_and_converged: return "switched_and_converged";
    case TerminalStatus::switched_only: return "switched_only";
    case TerminalStatus::max_iters_reached: return "max_iters_reached";
    case TerminalStatus::no_switch: return "no_switch";
  }
  return "unknown";
}

void XGemConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("xgem: lambda must be >= 0");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw ConfigError("xgem: eta must be > 0");
  if (max_iters == 0) throw ConfigError("xgem: max_iters must be positive");
  if (!(switch_confidence >= 0.5 && switch_confidence < 1.0)) {
    throw ConfigError("xgem: switch_confidence must lie in [0.5, 1)");
  }
  if (!(convergence_tol >= 0.0)) throw ConfigError("xgem: convergence_tol must be >= 0");
}

void to_json(nlohmann::json& j, const XGemConfig& c) {
  j = {{"lambda", c.lambda},
       {"eta", c.eta},
       {"max_iters", c.max_iters},
       {"switch_confidence", c.switch_confidence},
       {"convergence_tol", c.convergence_tol},
       {"result_mode", to_string(c.result_mode)},
       {"backtracking", c.backtracking}};
}

void from_json(const nlohmann::json& j, XGemConfig& c) {
  const XGemConfig d;
  c.lambda = j.value("lambda", d.lambda);
  c.eta = j.value("eta", d.eta);
  c.max_iters = j.value("max_iters", d.max_iters);
  c.switch_confidence = j.value("switch_confidence", d.switch_confidence);
  c.convergence_tol = j.value("convergence_tol", d.convergence_tol);
  c.result_mode = result_mode_from_string(j.value("result_mode", to_string(d.result_mode)));
  c.backtracking = j.value("backtracking", d.backtracking);
}

namespace {

struct Evaluation {
  double objective;
  nd::Tensor grad;   // [k]
  nd::Tensor x;      // [d]
  nd::Tensor proba;  // [C]
};

Evaluation evaluate(const nd::Tensor& z, const nd::Tensor& x_star, int y_tar, const nn::Generator& gen,
                    const nn::Classifier& clf, double lambda, bool with_grad) {
  const std::size_t k = z.size(), d = x_star.size();
  nd::Graph g;
  const nd::Var zv = with_grad ? g.parameter(z.reshaped({1, k})) : g.constant(z.reshaped({1, k}));
  const nd::Var x = gen.decode(zv);
  const nd::Var logits = clf.logits(x);
  const int target[] = {y_tar};
  const nd::Var recon = nd::squared_error(x, g.constant(x_star.reshaped({1, d})));
  const nd::Var obj = recon + nd::softmax_cross_entropy(logits, target) * lambda;
  Evaluation e{g.value(obj).item(), nd::Tensor(), g.value(x).reshaped({d}),
               g.value(nd::softmax(logits)).reshaped({clf.class_count()})};
  if (with_grad) {
    g.backward(obj);
    e.grad = g.grad(zv).reshaped({k});
  }
  return e;
}

nd::Tensor step_from(const nd::Tensor& z, const nd::Tensor& grad, double eta) {
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = z[i] - eta * grad[i];
  return nd::Tensor(z.shape(), std::move(out));
}

constexpr int kMaxHalvings = 20;

}  // namespace

double xgem_objective(const nd::Tensor& z, const nd::Tensor& x_star, int y_tar, const nn::Generator& gen,
                      const nn::Classifier& clf, double lambda) {
  return evaluate(z, x_star, y_tar, gen, clf, lambda, false).objective;
}

XGemResult find_xgem(const nd::Tensor& x_star, int y_star, int y_tar, const nn::CertifiedGenerator& cert,
                     const nn::Classifier& clf, const XGemConfig& cfg) {
  cfg.validate();
  const nn::Generator& gen = cert.generator();
  const int classes = static_cast<int>(clf.class_count());
  if (y_star < 0 || y_star >= classes || y_tar < 0 || y_tar >= classes) {
    throw ConfigError("xgem: labels must lie in [0, " + std::to_string(classes) + ")");
  }
  if (y_tar == y_star) throw ConfigError("xgem: target label must differ from the source label");
  if (x_star.size() != gen.data_dim() || x_star.size() != clf.input_dim()) {
    throw ShapeError("xgem: sample has " + std::to_string(x_star.size()) + " entries, generator expects " +
                     std::to_string(gen.data_dim()));
  }
  const nd::Tensor source = x_star.reshaped({x_star.size()});

  XGemTrajectory traj;
  traj.source = source;
  traj.source_label = y_star;
  traj.target_label = y_tar;

  auto record = [&](std::size_t iter, nd::Tensor z, const Evaluation& e) {
    const double dist = traj.steps.empty() ? 0.0 : nd::l2_distance(e.x, traj.steps.front().x);
    traj.steps.push_back({iter, std::move(z), e.x, e.proba, e.objective, dist});
    if (!traj.switch_index && e.proba[static_cast<std::size_t>(y_tar)] >= cfg.switch_confidence) {
      traj.switch_index = iter;
    }
  };

  nd::Tensor z = gen.encode(source);
  Evaluation cur;
  try {
    cur = evaluate(z, source, y_tar, gen, clf, cfg.lambda, true);
  } catch (const NumericError& e) {
    throw NumericError(std::string("xgem: non-finite value at iteration 0: ") + e.what());
  }
  record(0, z, cur);

  bool converged = false;
  std::size_t iter = 0;
  while (iter < cfg.max_iters) {
    ++iter;
    nd::Tensor next;
    Evaluation trial;
    bool accepted = false;
    try {
      if (cfg.backtracking) {
        double eta = cfg.eta;
        for (int h = 0; h <= kMaxHalvings && !accepted; ++h, eta *= 0.5) {
          try {
            next = step_from(z, cur.grad, eta);
            trial = evaluate(next, source, y_tar, gen, clf, cfg.lambda, true);
            accepted = trial.objective <= cur.objective;
          } catch (const NumericError&) {
            accepted = false;  // overflowed trial; a shorter step may still be fine
          }
        }
      } else {
        next = step_from(z, cur.grad, cfg.eta);
        trial = evaluate(next, source, y_tar, gen, clf, cfg.lambda, true);
        accepted = true;
      }
    } catch (const NumericError& e) {
      throw NumericError("xgem: non-finite value at iteration " + std::to_string(iter) + " (eta too large?): " +
                         e.what());
    }
    if (!accepted) {
      // No step length decreases the objective: a stationary point.
      converged = true;
      break;
    }
    const double decrease = cur.objective - trial.objective;
    z = next;
    cur = std::move(trial);
    record(iter, z, cur);
    if (std::abs(decrease) < cfg.convergence_tol) {
      converged = true;
      break;
    }
  }

  if (traj.switch_index) {
    traj.status = converged ? TerminalStatus::switched_and_converged : TerminalStatus::switched_only;
  } else {
    traj.status = converged ? TerminalStatus::no_switch : TerminalStatus::max_iters_reached;
  }

  const std::size_t pick =
      cfg.result_mode == ResultMode::switch_point && traj.switch_index ? *traj.switch_index : traj.steps.size() - 1;
  XGemResult result;
  result.exemplar = traj.steps[pick].x;
  result.exemplar_latent = traj.steps[pick].z;
  result.trajectory = std::move(traj);
  return result;
}

int TargetPolicy::target_for(int y, std::size_t class_count) const {
  if (target_map) {
    const auto it = target_map->find(y);
    if (it == target_map->end()) throw ConfigError("no target label configured for class " + std::to_string(y));
    return it->second;
  }
  if (class_count != 2) throw ConfigError("a target map is required for classifiers with more than two classes");
  if (y != 0 && y != 1) throw ConfigError("binary label expected, got " + std::to_string(y));
  return 1 - y;
}

std::vector<BatchItem> batch_xgems(const nd::Tensor& samples, std::span<const int> labels, const TargetPolicy& policy,
                                   const nn::CertifiedGenerator& gen, const nn::Classifier& clf,
                                   const XGemConfig& cfg, std::size_t threads) {
  cfg.validate();
  if (!policy.target_map && clf.class_count() != 2) {
    throw ConfigError("a target map is required for classifiers with more than two classes");
  }
  const std::size_t n = labels.size();
  if (n == 0) return {};
  if (samples.rank() != 2 || samples.rows() != n) throw ShapeError("batch_xgems: samples and labels disagree");

  std::vector<BatchItem> out(n);
  auto work = [&](std::size_t i) {
    out[i].index = i;
    try {
      const int target = policy.target_for(labels[i], clf.class_count());
      out[i].result = find_xgem(samples.row_at(i), labels[i], target, gen, clf, cfg);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return out;
  }
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) work(i);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

nlohmann::json trajectory_summary(const XGemTrajectory& traj, const XGemConfig& cfg) {
  nlohmann::json j;
  j["config"] = cfg;
  j["source_label"] = traj.source_label;
  j["target_label"] = traj.target_label;
  j["terminal_status"] = to_string(traj.status);
  j["switch_index"] = traj.switch_index ? nlohmann::json(*traj.switch_index) : nlohmann::json(nullptr);
  j["steps"] = traj.steps.size();
  j["source"] = std::vector<double>(traj.source.values().begin(), traj.source.values().end());
  return j;
}

}  // namespace xgem::exemplar
