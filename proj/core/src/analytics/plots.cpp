#include "xgem/analytics/plots.hpp"

#include <algorithm>
#include <sstream>

#include "xgem/io/binary.hpp"
#include "xgem/io/svg.hpp"

namespace xgem::analytics {

namespace {

using io::format_double;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

const char* color(std::size_t i) { return kPalette[i % (sizeof kPalette / sizeof kPalette[0])]; }

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

std::string stratum_name(const Stratum& s) {
  return "y=" + std::to_string(s.first) + (s.second >= 0 ? ",a=" + std::to_string(s.second) : std::string());
}

}  // namespace

std::string manifolds_svg(std::span<const ConfidenceManifold> manifolds, std::span<const LogisticFit> fits,
                          const std::string& title) {
  io::SvgPlot plot(title, "distance", "confidence (source label)");
  plot.y_range(0.0, 1.0);
  for (std::size_t i = 0; i < manifolds.size(); ++i) {
    const auto& m = manifolds[i];
    const auto xs = m.distances();
    plot.line(xs, m.confidences(), color(i));
    if (i < fits.size() && !fits[i].degenerate && !xs.empty()) {
      // Fitted in the manifold's own (possibly shifted) frame.
      const double lo = *std::min_element(xs.begin(), xs.end());
      const double hi = *std::max_element(xs.begin(), xs.end());
      const double x0 = fits[i].x0 - m.offset;
      std::vector<double> fx, fy;
      for (int k = 0; k <= 100; ++k) {
        const double x = lo + (hi - lo) * k / 100.0;
        fx.push_back(x);
        fy.push_back(1.0 - sigmoid_curve(fits[i].k, x0, x));
      }
      plot.line(fx, fy, color(i), 1.0, true);
    }
  }
  return plot.render();
}

std::string manifolds_csv(std::span<const ConfidenceManifold> manifolds) {
  std::ostringstream os;
  os << "sample,label,attribute,checkpoint,offset,distance,confidence\n";
  for (const auto& m : manifolds) {
    for (const auto& p : m.points) {
      os << m.sample_id << ',' << m.source_label << ',' << m.attribute << ',' << m.checkpoint << ','
         << format_double(m.offset) << ',' << format_double(p.distance) << ',' << format_double(p.confidence)
         << '\n';
    }
  }
  return os.str();
}

std::string fits_csv(std::span<const ConfidenceManifold> manifolds, std::span<const LogisticFit> fits) {
  std::ostringstream os;
  os << "sample,label,attribute,checkpoint,k,x0,residual,degenerate\n";
  for (std::size_t i = 0; i < std::min(manifolds.size(), fits.size()); ++i) {
    const auto& m = manifolds[i];
    const auto& f = fits[i];
    os << m.sample_id << ',' << m.source_label << ',' << m.attribute << ',' << m.checkpoint << ','
       << format_double(f.k) << ',' << format_double(f.x0) << ',' << format_double(f.residual) << ','
       << (f.degenerate ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string histogram_svg(const std::map<Stratum, Histogram2d>& hists, const std::string& title) {
  std::ostringstream os;
  const double pw = 360, ph = 320;
  const std::size_t n = std::max<std::size_t>(1, hists.size());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pw * static_cast<double>(n) << "\" height=\""
     << ph + 30 << "\">\n";
  os << "<text x=\"8\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  std::size_t idx = 0;
  for (const auto& [s, h] : hists) {
    std::size_t peak = 1;
    for (const auto& row : h.counts)
      for (auto c : row) peak = std::max(peak, c);
    io::SvgPlot panel(stratum_name(s) + " (degenerate " + std::to_string(h.degenerate) + ")", "x0", "k", pw, ph);
    panel.x_range(h.x0_edges.front(), h.x0_edges.back());
    panel.y_range(h.k_edges.front(), h.k_edges.back());
    for (std::size_t i = 0; i + 1 < h.k_edges.size(); ++i) {
      for (std::size_t j = 0; j + 1 < h.x0_edges.size(); ++j) {
        const auto c = h.counts[i][j];
        if (c == 0) continue;
        panel.box(h.x0_edges[j], h.k_edges[i], h.x0_edges[j + 1], h.k_edges[i + 1], "#08306b",
                  0.15 + 0.85 * static_cast<double>(c) / static_cast<double>(peak));
      }
    }
    // Nested <svg> elements get their own viewport at the given offset.
    std::string body = panel.render();
    body.replace(0, 5, "<svg x=\"" + format_double(pw * static_cast<double>(idx)) + "\" y=\"30\" ");
    os << body;
    ++idx;
  }
  os << "</svg>\n";
  return os.str();
}

std::string histogram_csv(const std::map<Stratum, Histogram2d>& hists) {
  std::ostringstream os;
  os << "label,attribute,k_lo,k_hi,x0_lo,x0_hi,count\n";
  for (const auto& [s, h] : hists) {
    for (std::size_t i = 0; i + 1 < h.k_edges.size(); ++i) {
      for (std::size_t j = 0; j + 1 < h.x0_edges.size(); ++j) {
        os << s.first << ',' << s.second << ',' << format_double(h.k_edges[i]) << ','
           << format_double(h.k_edges[i + 1]) << ',' << format_double(h.x0_edges[j]) << ','
           << format_double(h.x0_edges[j + 1]) << ',' << h.counts[i][j] << '\n';
      }
    }
    os << s.first << ',' << s.second << ",,,,," << h.degenerate << '\n';
  }
  return os.str();
}

std::string reliability_svg(const ReliabilityReport& r, const std::string& title) {
  io::SvgPlot plot(title, "mean confidence", "accuracy");
  plot.x_range(0.0, 1.0);
  plot.y_range(0.0, 1.0);
  plot.line({0.0, 1.0}, {0.0, 1.0}, "#888888", 1.0, true);
  auto draw = [&](const ReliabilityDiagram& d, const char* c, const std::string& label) {
    std::vector<double> xs, ys;
    for (const auto& b : d.bins) {
      if (!b.count) continue;
      xs.push_back(*b.mean_confidence);
      ys.push_back(*b.accuracy);
    }
    plot.line(xs, ys, c);
    plot.dots(xs, ys, c);
    plot.legend(label, c);
  };
  draw(r.overall, color(0), "all");
  std::size_t i = 1;
  for (const auto& [a, d] : r.by_attribute) draw(d, color(i++), "a=" + std::to_string(a));
  return plot.render();
}

std::string reliability_csv(const ReliabilityReport& r) {
  std::ostringstream os;
  os << "stratum,lo,hi,count,mean_confidence,accuracy\n";
  auto emit = [&](const std::string& name, const ReliabilityDiagram& d) {
    for (const auto& b : d.bins) {
      os << name << ',' << format_double(b.lo) << ',' << format_double(b.hi) << ',' << b.count << ','
         << opt(b.mean_confidence) << ',' << opt(b.accuracy) << '\n';
    }
  };
  emit("all", r.overall);
  for (const auto& [a, d] : r.by_attribute) emit("a=" + std::to_string(a), d);
  return os.str();
}

}  // namespace xgem::analytics
