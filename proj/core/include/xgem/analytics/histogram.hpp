#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgem/analytics/manifold.hpp"

namespace xgem::analytics {

/// A fit tagged with the (label, attribute) stratum of its sample.
struct StratifiedFit {
  LogisticFit fit;
  int label = 0;
  int attribute = -1;
};

using Stratum = std::pair<int, int>;  // (label, attribute)

struct Histogram2d {
  std::vector<double> k_edges;   // k_bins + 1
  std::vector<double> x0_edges;  // x0_bins + 1
  std::vector<std::vector<std::size_t>> counts;  // [k bin][x0 bin]
  std::size_t degenerate = 0;
  double mean_k = 0.0;  // over the non-degenerate fits
  double mean_x0 = 0.0;

  std::size_t total() const;  // binned + degenerate
};

struct HistogramSpec {
  std::size_t k_bins = 12;
  std::size_t x0_bins = 12;
};

/// One histogram per stratum present in `fits`, all sharing the same edges.
/// The range spans every non-degenerate fit; a zero-width range is widened by
/// 0.5 on each side. Values on the upper edge fall into the last bin.
///
/// Throws ConfigError when a stratum has no non-degenerate fit or the bin
/// counts are zero.
std::map<Stratum, Histogram2d> param_histogram2d(std::span<const StratifiedFit> fits, const HistogramSpec& spec);

nlohmann::json to_json(const std::map<Stratum, Histogram2d>& hists);

}  // namespace xgem::analytics
