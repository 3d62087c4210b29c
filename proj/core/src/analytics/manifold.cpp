#include "xgem/analytics/manifold.hpp"

#include <algorithm>
#include <cmath>

#include "xgem/error.hpp"

namespace xgem::analytics {

double quantize(double v) {
  constexpr double scale = 4294967296.0;  // 2^32
  return std::nearbyint(v * scale) / scale;
}

std::vector<double> ConfidenceManifold::distances() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.distance);
  return out;
}

std::vector<double> ConfidenceManifold::confidences() const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.confidence);
  return out;
}

ConfidenceManifold confidence_manifold(const exemplar::XGemTrajectory& traj, const nn::Classifier& clf) {
  if (traj.steps.empty()) throw ConfigError("confidence_manifold: empty trajectory");
  const auto y = static_cast<std::size_t>(traj.source_label);
  if (y >= clf.class_count()) throw ConfigError("confidence_manifold: source label outside the classifier");
  const nd::Tensor& origin = traj.steps.front().x;
  ConfidenceManifold m;
  m.source_label = traj.source_label;
  m.points.reserve(traj.steps.size());
  for (const auto& s : traj.steps) {
    double sq = 0.0;
    for (std::size_t k = 0; k < origin.size(); ++k) {
      const double d = s.x[k] - origin[k];
      sq += d * d;
    }
    m.points.push_back({quantize(std::sqrt(sq)), clf.predict_proba(s.x)[y]});
  }
  return m;
}

double sigmoid_curve(double k, double x0, double x) {
  const double t = k * (x - x0);
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

void to_json(nlohmann::json& j, const LogisticFit& f) {
  j = {{"k", f.k}, {"x0", f.x0}, {"residual", f.residual}, {"degenerate", f.degenerate}};
}

namespace {

double sse(std::span<const double> xs, std::span<const double> ys, double k, double x0) {
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = sigmoid_curve(k, x0, xs[i]) - ys[i];
    s += r * r;
  }
  return s;
}

struct Params {
  double k, x0, residual;
};

Params levenberg_marquardt(std::span<const double> xs, std::span<const double> ys, Params p) {
  double mu = 1e-3;
  for (int iter = 0; iter < 500; ++iter) {
    double a = 0.0, b = 0.0, c = 0.0, gk = 0.0, gx = 0.0;  // J^T J = [a b; b c], J^T r = (gk, gx)
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double s = sigmoid_curve(p.k, p.x0, xs[i]);
      const double ds = s * (1.0 - s);
      const double jk = ds * (xs[i] - p.x0);
      const double jx = -ds * p.k;
      const double r = s - ys[i];
      a += jk * jk;
      b += jk * jx;
      c += jx * jx;
      gk += jk * r;
      gx += jx * r;
    }
    bool accepted = false;
    while (mu < 1e20) {
      const double aa = a + mu * std::max(a, 1e-12), cc = c + mu * std::max(c, 1e-12);
      const double det = aa * cc - b * b;
      if (!(std::abs(det) > 0.0)) {
        mu *= 4.0;
        continue;
      }
      const double dk = -(cc * gk - b * gx) / det;
      const double dx = -(aa * gx - b * gk) / det;
      const double k = p.k + dk, x0 = p.x0 + dx;
      const double res = std::isfinite(k) && std::isfinite(x0) ? sse(xs, ys, k, x0) : INFINITY;
      if (res < p.residual) {
        const bool tiny = std::abs(dk) <= 1e-15 * (1.0 + std::abs(p.k)) && std::abs(dx) <= 1e-15 * (1.0 + std::abs(p.x0));
        p = {k, x0, res};
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        if (tiny) return p;
        break;
      }
      mu *= 4.0;
    }
    if (!accepted) break;
  }
  return p;
}

}  // namespace

LogisticFit fit_sigmoid(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ShapeError("fit_sigmoid: x and y lengths differ");
  if (xs.size() < 4) throw ConfigError("fit_sigmoid needs at least 4 points");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw NumericError("fit_sigmoid: non-finite input");
  }
  const auto [ylo, yhi] = std::minmax_element(ys.begin(), ys.end());
  if (*yhi - *ylo < kDegenerateRange) {
    return {0.0, 0.0, sse(xs, ys, 0.0, 0.0), true};
  }
  const auto [xlo, xhi] = std::minmax_element(xs.begin(), xs.end());
  const double span = *xhi - *xlo > 0.0 ? *xhi - *xlo : 1.0;

  // Coarse grid on at most 256 evenly spaced points.
  std::vector<double> gx, gy;
  const std::size_t stride = std::max<std::size_t>(1, xs.size() / 256);
  for (std::size_t i = 0; i < xs.size(); i += stride) {
    gx.push_back(xs[i]);
    gy.push_back(ys[i]);
  }
  std::vector<double> ks;
  constexpr int kSteps = 48;
  for (int i = 0; i < kSteps; ++i) {
    const double mag = std::exp(std::log(0.05) + (std::log(2000.0) - std::log(0.05)) * i / (kSteps - 1)) / span;
    ks.push_back(mag);
    ks.push_back(-mag);
  }
  std::vector<Params> cells;
  constexpr int xSteps = 61;
  for (double k : ks) {
    for (int j = 0; j < xSteps; ++j) {
      const double x0 = *xlo - span + 3.0 * span * j / (xSteps - 1);
      cells.push_back({k, x0, sse(gx, gy, k, x0)});
    }
  }
  const std::size_t starts = std::min<std::size_t>(4, cells.size());
  std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(starts), cells.end(),
                    [](const Params& a, const Params& b) { return a.residual < b.residual; });

  Params best{0.0, 0.0, INFINITY};
  for (std::size_t i = 0; i < starts; ++i) {
    Params p{cells[i].k, cells[i].x0, sse(xs, ys, cells[i].k, cells[i].x0)};
    p = levenberg_marquardt(xs, ys, p);
    if (p.residual < best.residual) best = p;
  }
  const double x0 = quantize(best.x0);
  return {best.k, x0, sse(xs, ys, best.k, x0), false};
}

LogisticFit fit_logistic(const ConfidenceManifold& m) {
  const auto xs = m.distances();
  auto ys = m.confidences();
  for (auto& y : ys) y = 1.0 - y;
  return fit_sigmoid(xs, ys);
}

std::vector<ConfidenceManifold> shift_align(std::span<const ConfidenceManifold> manifolds,
                                            std::span<const LogisticFit> fits) {
  if (manifolds.size() != fits.size()) throw ConfigError("shift_align: one fit per manifold is required");
  std::vector<ConfidenceManifold> out;
  out.reserve(manifolds.size());
  for (std::size_t i = 0; i < manifolds.size(); ++i) {
    if (fits[i].degenerate) throw ConfigError("shift_align: manifold " + std::to_string(i) + " has a degenerate fit");
    ConfidenceManifold m = manifolds[i];
    for (auto& p : m.points) p.distance -= fits[i].x0;
    m.offset += fits[i].x0;
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace xgem::analytics
