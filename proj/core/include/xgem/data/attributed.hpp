#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

#include "xgem/data/dataset.hpp"

namespace xgem::data {

/// Procedural grayscale images carrying two binary factors.
///
/// Label y lives in a thin band across the top rows (bright vs dim). The
/// attribute a is a diagonal stroke below it, '/' for a = 1 and '\' for a = 0.
/// The stroke covers far more pixels than the band, so a model that is free to
/// pick either factor leans on the stroke.
///
/// P(a == y) = (1 + rho) / 2, which makes corr(y, a) = rho for balanced y.
struct AttributedConfig {
  std::size_t side = 16;
  std::size_t n = 2000;
  double rho = 0.0;
  double noise = 0.05;
  std::size_t band_rows = 2;
  double band_low = 0.35;
  double band_high = 0.65;
  double stroke_intensity = 0.9;
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const AttributedConfig& c);
void from_json(const nlohmann::json& j, AttributedConfig& c);

Dataset gen_attributed(const AttributedConfig& cfg);

}  // namespace xgem::data
