#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace xgem::io {

/// Minimal 2-D plot emitter. Elements are given in data coordinates; ranges
/// are fitted to the data unless fixed.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label, double width = 640, double height = 480);

  void x_range(double lo, double hi) { x_fixed_ = {lo, hi}; }
  void y_range(double lo, double hi) { y_fixed_ = {lo, hi}; }

  void line(std::vector<double> xs, std::vector<double> ys, std::string color, double stroke = 1.5,
            bool dashed = false);
  void dots(std::vector<double> xs, std::vector<double> ys, std::string color, double radius = 2.5);
  /// Axis-aligned box from (x0, y0) to (x1, y1) with a fill opacity in [0, 1].
  void box(double x0, double y0, double x1, double y1, std::string color, double opacity);
  void vertical(double x, std::string color, bool dashed = true);
  void legend(std::string label, std::string color);

  std::string render() const;

 private:
  enum class Kind { line, dots, box, vertical };
  struct Element {
    Kind kind;
    std::vector<double> xs, ys;
    std::string color;
    double size = 1.0;
    double opacity = 1.0;
    bool dashed = false;
  };

  std::string title_, x_label_, y_label_;
  double width_, height_;
  std::optional<std::pair<double, double>> x_fixed_, y_fixed_;
  std::vector<Element> elements_;
  std::vector<std::pair<std::string, std::string>> legend_;
};

/// Grid of small grayscale images (values in [0, 1]), one row per strip.
/// `captions` is optional text under each cell; `marks` draws a highlighted
/// frame around chosen cells.
std::string svg_image_strips(const std::vector<std::vector<std::vector<double>>>& strips, std::size_t side,
                             const std::vector<std::vector<std::string>>& captions,
                             const std::vector<std::vector<bool>>& marks, const std::string& title);

}  // namespace xgem::io
