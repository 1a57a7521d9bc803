#include "qpspec/mat2.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qpspec {

Mat2 Mat2::rotation(double turns) {
  const double angle = 2.0 * std::numbers::pi * turns;
  const double cs = std::cos(angle), sn = std::sin(angle);
  return {cs, -sn, sn, cs};
}

Mat2 Mat2::inverse() const {
  const double det_value = det();
  if (det_value == 0.0) throw std::domain_error("Mat2::inverse: singular matrix");
  return {d / det_value, -b / det_value, -c / det_value, a / det_value};
}

double Mat2::norm() const {
  // sigma_max = (sqrt(s + 2|det|) + sqrt(s - 2|det|)) / 2 with s = |M|_F^2.
  const double s = a * a + b * b + c * c + d * d;
  const double two_det = 2.0 * std::abs(det());
  return 0.5 * (std::sqrt(s + two_det) + std::sqrt(std::max(0.0, s - two_det)));
}

}  // namespace qpspec
