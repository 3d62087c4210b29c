#include "xgem/data/parabola.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "xgem/error.hpp"
#include "xgem/random.hpp"

namespace xgem::data {

void ParabolaConfig::validate() const {
  if (n < 2) throw ConfigError("parabola: n must be at least 2");
  if (!(t_min < t_max)) throw ConfigError("parabola: t_min must be below t_max");
  if (!(t_split > t_min && t_split < t_max)) throw ConfigError("parabola: t_split must lie inside (t_min, t_max)");
  if (!(noise >= 0.0)) throw ConfigError("parabola: noise must be >= 0");
}

void to_json(nlohmann::json& j, const ParabolaConfig& c) {
  j = {{"n", c.n}, {"t_min", c.t_min}, {"t_max", c.t_max}, {"t_split", c.t_split}, {"noise", c.noise}, {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ParabolaConfig& c) {
  const ParabolaConfig d;
  c.n = j.value("n", d.n);
  c.t_min = j.value("t_min", d.t_min);
  c.t_max = j.value("t_max", d.t_max);
  c.t_split = j.value("t_split", d.t_split);
  c.noise = j.value("noise", d.noise);
  c.seed = j.value("seed", d.seed);
}

Dataset gen_parabola(const ParabolaConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> pos(cfg.t_min, cfg.t_max);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::vector<double> xs;
  xs.reserve(2 * cfg.n);
  Dataset ds;
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const double t = pos(rng);
    double x1 = t, x2 = t * t;
    if (cfg.noise > 0.0) {
      x1 += cfg.noise * jitter(rng);
      x2 += cfg.noise * jitter(rng);
    }
    xs.push_back(x1);
    xs.push_back(x2);
    ds.labels.push_back(t > cfg.t_split ? 1 : 0);
  }
  ds.features = nd::Tensor({cfg.n, 2}, std::move(xs));
  ds.provenance = "parabola";
  return ds;
}

namespace {

// Real roots of 2t^3 + (1 - 2b)t - a = 0, i.e. t^3 + p t + q = 0.
std::vector<double> stationary_points(double a, double b) {
  const double p = (1.0 - 2.0 * b) / 2.0;
  const double q = -a / 2.0;
  std::vector<double> roots;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    roots.push_back(std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s));
  } else {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double phi = std::acos(std::clamp(3.0 * q / (p * r), -1.0, 1.0));
    for (int k = 0; k < 3; ++k) roots.push_back(r * std::cos((phi - 2.0 * std::numbers::pi * k) / 3.0));
  }
  for (auto& t : roots) {
    for (int it = 0; it < 4; ++it) {
      const double f = 2.0 * t * t * t + (1.0 - 2.0 * b) * t - a;
      const double df = 6.0 * t * t + (1.0 - 2.0 * b);
      if (df == 0.0) break;
      t -= f / df;
    }
  }
  return roots;
}

}  // namespace

double parabola_distance(double a, double b) {
  double best = std::numeric_limits<double>::infinity();
  for (double t : stationary_points(a, b)) best = std::min(best, std::hypot(t - a, t * t - b));
  return best;
}

double parabola_distance(const nd::Tensor& point) {
  if (point.size() != 2) throw ShapeError("parabola_distance expects a 2-d point");
  return parabola_distance(point[0], point[1]);
}

}  // namespace xgem::data
