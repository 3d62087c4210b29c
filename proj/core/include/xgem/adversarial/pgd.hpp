#pragma once

#include <cstddef>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgem/exemplar/trajectory.hpp"
#include "xgem/nn/classifier.hpp"

namespace xgem::adversarial {

/// Untargeted l-infinity projected gradient ascent on the true-label loss.
struct AttackConfig {
  double epsilon = 0.3;
  std::size_t steps = 20;
  double step_size = 0.05;  // must not exceed epsilon (unless epsilon == 0)

  void validate() const;
};

void to_json(nlohmann::json& j, const AttackConfig& c);
void from_json(const nlohmann::json& j, AttackConfig& c);

struct AttackResult {
  nd::Tensor adversarial;
  /// steps + 1 entries starting at x; z is empty, objective is the loss.
  std::vector<exemplar::TrajectoryStep> trajectory;
};

/// x <- clip(x + step_size * sign(grad CE(f(x), y))) into the closed
/// epsilon-box around the input, `steps` times. sign(0) = 0.
AttackResult pgd_attack(const nd::Tensor& x, int y, const nn::Classifier& clf, const AttackConfig& cfg);

}  // namespace xgem::adversarial
