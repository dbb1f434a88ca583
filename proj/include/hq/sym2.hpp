#pragma once

#include <array>
#include <cmath>

namespace hq {

using Vec2 = std::array<double, 2>;

/// Symmetric 2x2 matrix stored as (xx, xy, yy).
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  static constexpr Sym2 identity() { return {1.0, 0.0, 1.0}; }

  constexpr double det() const { return xx * yy - xy * xy; }
  constexpr double trace() const { return xx + yy; }
  constexpr double operator()(int i, int j) const {
    return i == 0 ? (j == 0 ? xx : xy) : (j == 0 ? xy : yy);
  }
  constexpr bool positive_definite() const { return xx > 0.0 && det() > 0.0; }

  Sym2 inverse() const {
    const double d = det();
    return {yy / d, -xy / d, xx / d};
  }
  constexpr double quad(const Vec2& v) const {
    return xx * v[0] * v[0] + 2.0 * xy * v[0] * v[1] + yy * v[1] * v[1];
  }
  constexpr double bilinear(const Vec2& a, const Vec2& b) const {
    return xx * a[0] * b[0] + xy * (a[0] * b[1] + a[1] * b[0]) + yy * a[1] * b[1];
  }
  constexpr Vec2 apply(const Vec2& v) const {
    return {xx * v[0] + xy * v[1], xy * v[0] + yy * v[1]};
  }

  friend constexpr Sym2 operator+(const Sym2& a, const Sym2& b) {
    return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy};
  }
  friend constexpr Sym2 operator-(const Sym2& a, const Sym2& b) {
    return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy};
  }
  friend constexpr Sym2 operator*(double s, const Sym2& a) {
    return {s * a.xx, s * a.xy, s * a.yy};
  }
};

/// Rank-one outer product v v^T.
constexpr Sym2 outer(const Vec2& v) { return {v[0] * v[0], v[0] * v[1], v[1] * v[1]}; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

}  // namespace hq
