#include "xgem/analytics/histogram.hpp"

#include <algorithm>
#include <cmath>

#include "xgem/error.hpp"

namespace xgem::analytics {

std::size_t Histogram2d::total() const {
  std::size_t n = degenerate;
  for (const auto& row : counts)
    for (auto c : row) n += c;
  return n;
}

namespace {

std::vector<double> edges(double lo, double hi, std::size_t bins) {
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  e.back() = hi;
  return e;
}

std::size_t bin_of(const std::vector<double>& e, double v) {
  const std::size_t bins = e.size() - 1;
  const double t = (v - e.front()) / (e.back() - e.front());
  const auto b = static_cast<std::size_t>(std::max(0.0, std::floor(t * static_cast<double>(bins))));
  return std::min(b, bins - 1);
}

}  // namespace

std::map<Stratum, Histogram2d> param_histogram2d(std::span<const StratifiedFit> fits, const HistogramSpec& spec) {
  if (spec.k_bins == 0 || spec.x0_bins == 0) throw ConfigError("histogram bin counts must be positive");
  double klo = INFINITY, khi = -INFINITY, xlo = INFINITY, xhi = -INFINITY;
  std::map<Stratum, std::size_t> live;
  for (const auto& f : fits) {
    auto& n = live[{f.label, f.attribute}];
    if (f.fit.degenerate) continue;
    ++n;
    klo = std::min(klo, f.fit.k);
    khi = std::max(khi, f.fit.k);
    xlo = std::min(xlo, f.fit.x0);
    xhi = std::max(xhi, f.fit.x0);
  }
  for (const auto& [s, n] : live) {
    if (n == 0) {
      throw ConfigError("histogram stratum (y=" + std::to_string(s.first) + ", a=" + std::to_string(s.second) +
                        ") has no non-degenerate fit");
    }
  }
  std::map<Stratum, Histogram2d> out;
  if (live.empty()) return out;
  const auto ke = edges(klo, khi, spec.k_bins);
  const auto xe = edges(xlo, xhi, spec.x0_bins);
  for (const auto& [s, n] : live) {
    auto& h = out[s];
    h.k_edges = ke;
    h.x0_edges = xe;
    h.counts.assign(spec.k_bins, std::vector<std::size_t>(spec.x0_bins, 0));
  }
  for (const auto& f : fits) {
    auto& h = out[{f.label, f.attribute}];
    if (f.fit.degenerate) {
      ++h.degenerate;
      continue;
    }
    ++h.counts[bin_of(ke, f.fit.k)][bin_of(xe, f.fit.x0)];
    h.mean_k += f.fit.k;
    h.mean_x0 += f.fit.x0;
  }
  for (auto& [s, h] : out) {
    const double n = static_cast<double>(live[s]);
    h.mean_k /= n;
    h.mean_x0 /= n;
  }
  return out;
}

nlohmann::json to_json(const std::map<Stratum, Histogram2d>& hists) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [s, h] : hists) {
    arr.push_back({{"label", s.first},
                   {"attribute", s.second},
                   {"k_edges", h.k_edges},
                   {"x0_edges", h.x0_edges},
                   {"counts", h.counts},
                   {"degenerate", h.degenerate},
                   {"mean_k", h.mean_k},
                   {"mean_x0", h.mean_x0}});
  }
  return arr;
}

}  // namespace xgem::analytics
