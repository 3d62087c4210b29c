#pragma once

#include <map>
#include <span>
#include <string>

#include "xgem/analytics/histogram.hpp"
#include "xgem/analytics/manifold.hpp"
#include "xgem/analytics/reliability.hpp"

namespace xgem::analytics {

// Each figure comes with a CSV holding exactly the plotted values.

/// Manifolds as lines with their fitted curves dashed. `fits` may be empty.
std::string manifolds_svg(std::span<const ConfidenceManifold> manifolds, std::span<const LogisticFit> fits,
                          const std::string& title);
/// Columns: sample, label, attribute, checkpoint, offset, distance, confidence.
std::string manifolds_csv(std::span<const ConfidenceManifold> manifolds);

/// Columns: sample, label, attribute, checkpoint, k, x0, residual, degenerate.
std::string fits_csv(std::span<const ConfidenceManifold> manifolds, std::span<const LogisticFit> fits);

/// One panel per stratum, shaded by count.
std::string histogram_svg(const std::map<Stratum, Histogram2d>& hists, const std::string& title);
/// Columns: label, attribute, k_lo, k_hi, x0_lo, x0_hi, count. Degenerate fits
/// appear as a row with empty edges.
std::string histogram_csv(const std::map<Stratum, Histogram2d>& hists);

/// Accuracy against mean confidence, with the identity dashed.
std::string reliability_svg(const ReliabilityReport& r, const std::string& title);
/// Columns: stratum, lo, hi, count, mean_confidence, accuracy.
std::string reliability_csv(const ReliabilityReport& r);

}  // namespace xgem::analytics
