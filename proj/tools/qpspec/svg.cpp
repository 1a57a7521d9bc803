#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace qpspec::cli {
namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void widen(double& lo, double& hi) {
  if (!(lo < hi)) {
    lo -= 0.5;
    hi += 0.5;
  }
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void SvgPlot::set_x_range(double lo, double hi) {
  fixed_x_ = true;
  x_lo_ = lo;
  x_hi_ = hi;
}

void SvgPlot::set_y_range(double lo, double hi) {
  fixed_y_ = true;
  y_lo_ = lo;
  y_hi_ = hi;
}

std::string SvgPlot::render() const {
  double xl = x_lo_, xh = x_hi_, yl = y_lo_, yh = y_hi_;
  if (!fixed_x_ || !fixed_y_) {
    double ax = std::numeric_limits<double>::infinity(), bx = -ax, ay = ax, by = -ax;
    for (const auto& s : series_) {
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        ax = std::min(ax, s.x[i]);
        bx = std::max(bx, s.x[i]);
        ay = std::min(ay, s.y[i]);
        by = std::max(by, s.y[i]);
      }
    }
    for (const auto& c : cells_) {
      ax = std::min(ax, c.x0);
      bx = std::max(bx, c.x1);
      ay = std::min(ay, c.y0);
      by = std::max(by, c.y1);
    }
    if (!std::isfinite(ax)) ax = 0, bx = 1, ay = 0, by = 1;
    if (!fixed_x_) xl = ax, xh = bx;
    if (!fixed_y_) yl = ay, yh = by;
  }
  widen(xl, xh);
  widen(yl, yh);

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xl) / (xh - xl) * pw; };
  auto py = [&](double y) { return kTop + (yh - y) / (yh - yl) * ph; };

  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\">\n",
      kWidth, kHeight, kWidth, kHeight);
  out += fmt::format("<title>{}</title>\n", escape(title_));
  if (!description_.empty()) out += fmt::format("<desc>{}</desc>\n", escape(description_));
  out += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth,
                     kHeight);

  for (const auto& c : cells_) {
    const double x0 = px(c.x0), x1 = px(c.x1), y0 = py(c.y1), y1 = py(c.y0);
    out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"black\"/>\n",
                       x0, y0, std::max(x1 - x0, 0.5), std::max(y1 - y0, 0.5));
  }

  // Axes and ticks.
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                     kLeft, kTop, pw, ph);
  for (int i = 0; i <= 5; ++i) {
    const double x = xl + (xh - xl) * i / 5.0, y = yl + (yh - yl) * i / 5.0;
    out += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"black\"/>\n",
                       px(x), kTop + ph, kTop + ph + 5);
    out += fmt::format(
        "<text x=\"{:.2f}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{:.3g}</text>\n", px(x),
        kTop + ph + 18, x);
    out += fmt::format("<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"black\"/>\n",
                       kLeft - 5, py(y), kLeft);
    out += fmt::format(
        "<text x=\"{}\" y=\"{:.2f}\" font-size=\"11\" text-anchor=\"end\">{:.3g}</text>\n", kLeft - 8,
        py(y) + 4, y);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
                     kLeft + pw / 2, kTop - 15, escape(title_));
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
                     kLeft + pw / 2, kHeight - 10, escape(x_label_));
  out += fmt::format(
      "<text x=\"15\" y=\"{0}\" font-size=\"12\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 15 {0})\">{1}</text>\n",
      kTop + ph / 2, escape(y_label_));

  for (std::size_t k = 0; k < series_.size(); ++k) {
    const auto& s = series_[k];
    const char* color = kColors[k % std::size(kColors)];
    std::string points;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (s.points) {
        out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2\" fill=\"{}\"/>\n", px(s.x[i]),
                           py(s.y[i]), color);
      } else {
        points += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.y[i]));
      }
    }
    if (!points.empty()) {
      points.pop_back();
      out += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"/>\n",
                         points, color);
    }
    if (!s.label.empty()) {
      out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{}\">{}</text>\n",
                         kLeft + 10, kTop + 15 + 14 * k, color, escape(s.label));
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace qpspec::cli
