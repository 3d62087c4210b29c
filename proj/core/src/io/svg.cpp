#include "xgem/io/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "xgem/io/binary.hpp"

namespace xgem::io {

namespace {

constexpr double kMargin = 56.0;

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  // Fixed precision keeps the files short and stable.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::pair<double, double> padded(double lo, double hi) {
  if (!(lo < hi)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label, double width, double height)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)), width_(width),
      height_(height) {}

void SvgPlot::line(std::vector<double> xs, std::vector<double> ys, std::string color, double stroke, bool dashed) {
  elements_.push_back({Kind::line, std::move(xs), std::move(ys), std::move(color), stroke, 1.0, dashed});
}

void SvgPlot::dots(std::vector<double> xs, std::vector<double> ys, std::string color, double radius) {
  elements_.push_back({Kind::dots, std::move(xs), std::move(ys), std::move(color), radius, 1.0, false});
}

void SvgPlot::box(double x0, double y0, double x1, double y1, std::string color, double opacity) {
  elements_.push_back({Kind::box, {x0, x1}, {y0, y1}, std::move(color), 0.0, opacity, false});
}

void SvgPlot::vertical(double x, std::string color, bool dashed) {
  elements_.push_back({Kind::vertical, {x}, {}, std::move(color), 1.0, 1.0, dashed});
}

void SvgPlot::legend(std::string label, std::string color) { legend_.emplace_back(std::move(label), std::move(color)); }

std::string SvgPlot::render() const {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& e : elements_) {
    for (double x : e.xs) xlo = std::min(xlo, x), xhi = std::max(xhi, x);
    for (double y : e.ys) ylo = std::min(ylo, y), yhi = std::max(yhi, y);
  }
  if (!std::isfinite(xlo)) xlo = 0, xhi = 1;
  if (!std::isfinite(ylo)) ylo = 0, yhi = 1;
  const auto [x0, x1] = x_fixed_ ? *x_fixed_ : padded(xlo, xhi);
  const auto [y0, y1] = y_fixed_ ? *y_fixed_ : padded(ylo, yhi);
  const double pw = width_ - 2 * kMargin, ph = height_ - 2 * kMargin;
  auto px = [&](double x) { return kMargin + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return height_ - kMargin - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\"" << num(height_)
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << num(width_ / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << esc(title_)
    << "</text>\n";
  s << "<rect x=\"" << num(kMargin) << "\" y=\"" << num(kMargin) << "\" width=\"" << num(pw) << "\" height=\""
    << num(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    s << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(height_ - kMargin + 16) << "\" text-anchor=\"middle\">"
      << esc(format_double(std::round(xv * 1000) / 1000)) << "</text>\n";
    s << "<text x=\"" << num(kMargin - 6) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">"
      << esc(format_double(std::round(yv * 1000) / 1000)) << "</text>\n";
  }
  s << "<text x=\"" << num(width_ / 2) << "\" y=\"" << num(height_ - 12) << "\" text-anchor=\"middle\">"
    << esc(x_label_) << "</text>\n";
  s << "<text transform=\"translate(14," << num(height_ / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << esc(y_label_) << "</text>\n";

  s << "<clipPath id=\"plot\"><rect x=\"" << num(kMargin) << "\" y=\"" << num(kMargin) << "\" width=\"" << num(pw)
    << "\" height=\"" << num(ph) << "\"/></clipPath>\n<g clip-path=\"url(#plot)\">\n";
  for (const auto& e : elements_) {
    const std::string dash = e.dashed ? " stroke-dasharray=\"4 3\"" : "";
    switch (e.kind) {
      case Kind::line: {
        s << "<polyline fill=\"none\" stroke=\"" << e.color << "\" stroke-width=\"" << num(e.size) << "\"" << dash
          << " points=\"";
        for (std::size_t i = 0; i < e.xs.size(); ++i) s << num(px(e.xs[i])) << ',' << num(py(e.ys[i])) << ' ';
        s << "\"/>\n";
        break;
      }
      case Kind::dots:
        for (std::size_t i = 0; i < e.xs.size(); ++i) {
          s << "<circle cx=\"" << num(px(e.xs[i])) << "\" cy=\"" << num(py(e.ys[i])) << "\" r=\"" << num(e.size)
            << "\" fill=\"" << e.color << "\"/>\n";
        }
        break;
      case Kind::box: {
        const double l = px(std::min(e.xs[0], e.xs[1])), r = px(std::max(e.xs[0], e.xs[1]));
        const double t = py(std::max(e.ys[0], e.ys[1])), b = py(std::min(e.ys[0], e.ys[1]));
        s << "<rect x=\"" << num(l) << "\" y=\"" << num(t) << "\" width=\"" << num(r - l) << "\" height=\""
          << num(b - t) << "\" fill=\"" << e.color << "\" fill-opacity=\"" << num(e.opacity) << "\"/>\n";
        break;
      }
      case Kind::vertical:
        s << "<line x1=\"" << num(px(e.xs[0])) << "\" x2=\"" << num(px(e.xs[0])) << "\" y1=\"" << num(kMargin)
          << "\" y2=\"" << num(height_ - kMargin) << "\" stroke=\"" << e.color << "\"" << dash << "/>\n";
        break;
    }
  }
  s << "</g>\n";
  for (std::size_t i = 0; i < legend_.size(); ++i) {
    const double y = kMargin + 14 + 16 * static_cast<double>(i);
    s << "<rect x=\"" << num(width_ - kMargin - 130) << "\" y=\"" << num(y - 9) << "\" width=\"10\" height=\"10\" fill=\""
      << legend_[i].second << "\"/>\n";
    s << "<text x=\"" << num(width_ - kMargin - 114) << "\" y=\"" << num(y) << "\">" << esc(legend_[i].first)
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::string svg_image_strips(const std::vector<std::vector<std::vector<double>>>& strips, std::size_t side,
                             const std::vector<std::vector<std::string>>& captions,
                             const std::vector<std::vector<bool>>& marks, const std::string& title) {
  const double cell = 3.0, gap = 8.0, caption = 14.0;
  const double img = cell * static_cast<double>(side);
  std::size_t cols = 0;
  for (const auto& row : strips) cols = std::max(cols, row.size());
  const double width = gap + static_cast<double>(cols) * (img + gap);
  const double height = 30 + static_cast<double>(strips.size()) * (img + caption + gap);
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
    << "\" font-family=\"sans-serif\" font-size=\"9\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << num(gap) << "\" y=\"18\" font-size=\"13\">" << esc(title) << "</text>\n";
  for (std::size_t r = 0; r < strips.size(); ++r) {
    const double top = 30 + static_cast<double>(r) * (img + caption + gap);
    for (std::size_t c = 0; c < strips[r].size(); ++c) {
      const double left = gap + static_cast<double>(c) * (img + gap);
      const auto& px = strips[r][c];
      for (std::size_t i = 0; i < side * side && i < px.size(); ++i) {
        const int g = static_cast<int>(std::lround(255.0 * std::clamp(px[i], 0.0, 1.0)));
        s << "<rect x=\"" << num(left + cell * static_cast<double>(i % side)) << "\" y=\""
          << num(top + cell * static_cast<double>(i / side)) << "\" width=\"" << num(cell) << "\" height=\""
          << num(cell) << "\" fill=\"rgb(" << g << ',' << g << ',' << g << ")\"/>\n";
      }
      if (r < marks.size() && c < marks[r].size() && marks[r][c]) {
        s << "<rect x=\"" << num(left - 2) << "\" y=\"" << num(top - 2) << "\" width=\"" << num(img + 4)
          << "\" height=\"" << num(img + 4) << "\" fill=\"none\" stroke=\"#888\" stroke-width=\"3\"/>\n";
      }
      if (r < captions.size() && c < captions[r].size()) {
        s << "<text x=\"" << num(left) << "\" y=\"" << num(top + img + 11) << "\">" << esc(captions[r][c])
          << "</text>\n";
      }
    }
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace xgem::io
