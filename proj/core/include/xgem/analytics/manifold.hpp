#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgem/exemplar/xgem.hpp"
#include "xgem/nn/classifier.hpp"

namespace xgem::analytics {

/// Snaps v to the nearest multiple of 2^-32. Distances and midpoints live on
/// this lattice so that shifting one by the other is exact.
double quantize(double v);

struct ManifoldPoint {
  double distance = 0.0;    // from the step-0 reconstruction, data space L2
  double confidence = 0.0;  // probability of the source label
};

struct ConfidenceManifold {
  std::vector<ManifoldPoint> points;
  std::size_t sample_id = 0;
  int source_label = 0;
  int attribute = -1;  // -1 when the record has none
  std::string checkpoint;
  double offset = 0.0;  // total shift applied by shift_align

  std::vector<double> distances() const;
  std::vector<double> confidences() const;
};

/// One point per trajectory step. Confidence is recomputed with `clf` on the
/// step's reconstruction.
ConfidenceManifold confidence_manifold(const exemplar::XGemTrajectory& traj, const nn::Classifier& clf);

/// f(x) = 1 / (1 + exp(-k (x - x0))).
double sigmoid_curve(double k, double x0, double x);

struct LogisticFit {
  double k = 0.0;
  double x0 = 0.0;
  double residual = 0.0;  // sum of squared errors
  bool degenerate = false;
};

void to_json(nlohmann::json& j, const LogisticFit& f);

/// Below this spread of y the curve is called flat: degenerate, k = 0, x0 = 0.
inline constexpr double kDegenerateRange = 0.05;

/// Least-squares sigmoid through (xs, ys): a coarse (k, x0) grid, then
/// Levenberg-Marquardt from the best grid cells. x0 is snapped with quantize().
/// Needs at least 4 points.
LogisticFit fit_sigmoid(std::span<const double> xs, std::span<const double> ys);

/// Fits 1 - confidence against distance, so that a curve falling across the
/// boundary gets k > 0 and x0 at the crossing.
LogisticFit fit_logistic(const ConfidenceManifold& m);

/// Translates each manifold by -x0 of its fit. Throws ConfigError on a
/// degenerate fit or a size mismatch.
std::vector<ConfidenceManifold> shift_align(std::span<const ConfidenceManifold> manifolds,
                                            std::span<const LogisticFit> fits);

}  // namespace xgem::analytics
