#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgem/exemplar/trajectory.hpp"
#include "xgem/nn/classifier.hpp"
#include "xgem/nn/generator.hpp"

namespace xgem::exemplar {

enum class ResultMode { switch_point, converged };

enum class TerminalStatus {
  switched_and_converged,  // switched, then the objective stopped improving
  switched_only,           // switched, max_iters hit before convergence
  max_iters_reached,       // no switch, still descending at max_iters
  no_switch,               // converged (or stalled) without ever switching
};

std::string to_string(ResultMode m);
ResultMode result_mode_from_string(const std::string& s);
std::string to_string(TerminalStatus s);

/// True for the two statuses that carry a label switch.
inline bool switched(TerminalStatus s) {
  return s == TerminalStatus::switched_and_converged || s == TerminalStatus::switched_only;
}

struct XGemConfig {
  double lambda = 1.0;
  double eta = 0.05;
  std::size_t max_iters = 500;
  double switch_confidence = 0.5;
  double convergence_tol = 1e-6;  // on the per-step objective decrease
  ResultMode result_mode = ResultMode::switch_point;
  /// Halve the step (up to 20 times) until the objective does not increase.
  bool backtracking = true;

  void validate() const;
};

void to_json(nlohmann::json& j, const XGemConfig& c);
void from_json(const nlohmann::json& j, XGemConfig& c);

struct XGemTrajectory {
  std::vector<TrajectoryStep> steps;
  std::optional<std::size_t> switch_index;
  nd::Tensor source;
  int source_label = 0;
  int target_label = 0;
  TerminalStatus status = TerminalStatus::no_switch;
};

struct XGemResult {
  nd::Tensor exemplar;         // decode(exemplar_latent)
  nd::Tensor exemplar_latent;
  XGemTrajectory trajectory;
};

/// Descends  ||x* - G(z)||^2 + lambda * CE(f(G(z)), y_tar)  over z, starting
/// from z = F(x*).
///
/// The switch is the first step (step 0 included) where f gives y_tar at
/// least `switch_confidence`. The run stops once the objective decrease falls
/// below `convergence_tol`, or at max_iters. A run that converges before any
/// switch stops there as no_switch.
///
/// Throws ConfigError for y_tar == y* or labels outside the classifier's
/// range, ShapeError for a mismatched x*, and NumericError (naming the
/// iteration) when a fixed-step run leaves the finite range.
XGemResult find_xgem(const nd::Tensor& x_star, int y_star, int y_tar, const nn::CertifiedGenerator& gen,
                     const nn::Classifier& clf, const XGemConfig& cfg);

/// Value of the traversal objective at z, for oracles and diagnostics.
double xgem_objective(const nd::Tensor& z, const nd::Tensor& x_star, int y_tar, const nn::Generator& gen,
                      const nn::Classifier& clf, double lambda);

/// Target label per source label. Without a map only binary classifiers are
/// accepted, and the target is the other class.
struct TargetPolicy {
  std::optional<std::map<int, int>> target_map;

  int target_for(int y, std::size_t class_count) const;
};

struct BatchItem {
  std::size_t index = 0;
  std::optional<XGemResult> result;
  std::string error;  // set when result is empty
};

/// One traversal per row of `samples`, returned in input order. A failing row
/// records its error and does not stop the batch. `threads` = 0 picks the
/// hardware concurrency; results do not depend on it.
std::vector<BatchItem> batch_xgems(const nd::Tensor& samples, std::span<const int> labels, const TargetPolicy& policy,
                                   const nn::CertifiedGenerator& gen, const nn::Classifier& clf,
                                   const XGemConfig& cfg, std::size_t threads = 1);

/// JSON sidecar for a trajectory CSV: config, source, labels, status, switch.
nlohmann::json trajectory_summary(const XGemTrajectory& traj, const XGemConfig& cfg);

}  // namespace xgem::exemplar
