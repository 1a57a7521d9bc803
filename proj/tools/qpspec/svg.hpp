#pragma once

#include <string>
#include <vector>

namespace qpspec::cli {

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string label;
  /// Draw markers instead of a polyline.
  bool points = false;
};

/// A filled cell of a raster plot, in data coordinates.
struct Cell {
  double x0, x1, y0, y1;
};

/// Minimal hand-written SVG: axes with tick labels, polylines, markers and
/// filled rectangles.  Output depends only on the inputs.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string x_label, std::string y_label);

  void add(Series series) { series_.push_back(std::move(series)); }
  void add_cells(std::vector<Cell> cells) { cells_ = std::move(cells); }
  /// Free-form text embedded in <desc>, typically the resolved config.
  void set_description(std::string text) { description_ = std::move(text); }
  void set_x_range(double lo, double hi);
  void set_y_range(double lo, double hi);

  std::string render() const;

 private:
  std::string title_, x_label_, y_label_, description_;
  std::vector<Series> series_;
  std::vector<Cell> cells_;
  bool fixed_x_ = false, fixed_y_ = false;
  double x_lo_ = 0, x_hi_ = 1, y_lo_ = 0, y_hi_ = 1;
};

}  // namespace qpspec::cli
