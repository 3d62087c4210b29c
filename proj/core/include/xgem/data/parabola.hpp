#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

#include "xgem/data/dataset.hpp"

namespace xgem::data {

/// Points x = (t, t^2) + noise with t uniform on [t_min, t_max]; label 1 iff t > t_split.
struct ParabolaConfig {
  std::size_t n = 512;
  double t_min = -1.5;
  double t_max = 1.5;
  double t_split = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const ParabolaConfig& c);
void from_json(const nlohmann::json& j, ParabolaConfig& c);

/// No attribute column.
Dataset gen_parabola(const ParabolaConfig& cfg);

/// Euclidean distance from (a, b) to the curve {(t, t^2)}.
///
/// The closest t solves 2t^3 + (1 - 2b)t - a = 0; every real root is taken in
/// closed form, polished with Newton steps, and the nearest one wins.
double parabola_distance(double a, double b);
double parabola_distance(const nd::Tensor& point);

}  // namespace xgem::data
