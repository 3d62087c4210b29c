#include "xgem/data/attributed.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "xgem/error.hpp"
#include "xgem/random.hpp"

namespace xgem::data {

void AttributedConfig::validate() const {
  if (side < 8) throw ConfigError("attributed: side must be at least 8");
  if (n < 4) throw ConfigError("attributed: n must be at least 4");
  if (!(rho >= -1.0 && rho <= 1.0)) throw ConfigError("attributed: rho must lie in [-1, 1]");
  if (!(noise >= 0.0)) throw ConfigError("attributed: noise must be >= 0");
  if (band_rows == 0 || band_rows + 4 > side) throw ConfigError("attributed: band_rows leaves no room for the stroke");
  if (!(band_low >= 0.0 && band_low < band_high && band_high <= 1.0)) {
    throw ConfigError("attributed: need 0 <= band_low < band_high <= 1");
  }
  if (!(stroke_intensity > 0.0 && stroke_intensity <= 1.0)) throw ConfigError("attributed: stroke_intensity in (0, 1]");
}

void to_json(nlohmann::json& j, const AttributedConfig& c) {
  j = {{"side", c.side},
       {"n", c.n},
       {"rho", c.rho},
       {"noise", c.noise},
       {"band_rows", c.band_rows},
       {"band_low", c.band_low},
       {"band_high", c.band_high},
       {"stroke_intensity", c.stroke_intensity},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, AttributedConfig& c) {
  const AttributedConfig d;
  c.side = j.value("side", d.side);
  c.n = j.value("n", d.n);
  c.rho = j.value("rho", d.rho);
  c.noise = j.value("noise", d.noise);
  c.band_rows = j.value("band_rows", d.band_rows);
  c.band_low = j.value("band_low", d.band_low);
  c.band_high = j.value("band_high", d.band_high);
  c.stroke_intensity = j.value("stroke_intensity", d.stroke_intensity);
  c.seed = j.value("seed", d.seed);
}

Dataset gen_attributed(const AttributedConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution agree((1.0 + cfg.rho) / 2.0);
  std::uniform_real_distribution<double> wobble(-0.04, 0.04);
  std::uniform_int_distribution<int> offset(-1, 1);
  std::normal_distribution<double> pixel_noise(0.0, 1.0);

  const std::size_t s = cfg.side;
  const std::size_t top = cfg.band_rows + 1;  // first stroke row; one blank row under the band
  const std::size_t span = s - top - 1;       // stroke rows [top, top + span)

  Dataset ds;
  std::vector<double> pixels;
  pixels.reserve(cfg.n * s * s);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const int y = coin(rng) ? 1 : 0;
    const int a = agree(rng) ? y : 1 - y;
    std::vector<double> img(s * s, 0.0);

    const double band = (y == 1 ? cfg.band_high : cfg.band_low) + wobble(rng);
    for (std::size_t r = 0; r < cfg.band_rows; ++r) {
      for (std::size_t c = 1; c + 1 < s; ++c) img[r * s + c] = band;
    }

    // Two-pixel-wide diagonal; '/' rises to the right, '\' falls.
    const int shift = offset(rng);
    const double ink = cfg.stroke_intensity + wobble(rng);
    for (std::size_t k = 0; k < span; ++k) {
      const std::size_t r = top + k;
      const long col0 = static_cast<long>(2 + (k * (s - 5)) / (span - 1)) + shift;
      const long col = a == 1 ? static_cast<long>(s) - 1 - col0 : col0;
      for (long c : {col, col + (a == 1 ? -1L : 1L)}) {
        if (c >= 0 && c < static_cast<long>(s)) img[r * s + static_cast<std::size_t>(c)] = ink;
      }
    }

    for (auto& v : img) {
      if (cfg.noise > 0.0) v += cfg.noise * pixel_noise(rng);
      v = std::clamp(v, 0.0, 1.0);
    }
    pixels.insert(pixels.end(), img.begin(), img.end());
    ds.labels.push_back(y);
    ds.attributes.push_back(a);
  }
  ds.features = nd::Tensor({cfg.n, s * s}, std::move(pixels));
  ds.provenance = "attributed";
  return ds;
}

}  // namespace xgem::data
