#pragma once

namespace qpspec {

/// 2x2 real matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  static Mat2 identity() { return {}; }
  /// Rotation by `turns` full turns.
  static Mat2 rotation(double turns);

  double det() const { return a * d - b * c; }
  Mat2 inverse() const;
  /// Spectral (operator 2-) norm.
  double norm() const;

  Mat2 scaled(double s) const { return {a * s, b * s, c * s, d * s}; }
  bool operator==(const Mat2&) const = default;
};

inline Mat2 operator*(const Mat2& x, const Mat2& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
          x.c * y.b + x.d * y.d};
}

}  // namespace qpspec
