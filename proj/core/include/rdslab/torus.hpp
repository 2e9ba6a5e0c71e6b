#pragma once
// Flat-torus geometry: wrapped points, tangent vectors, 2x2 matrices,
// projective directions, closed-form singular decomposition.

#include <array>
#include <cmath>
#include <stdexcept>

namespace rdslab {

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator-() const { return {-x, -y}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  // z-component of the cross product; orientation of the pair (this, o).
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  Vec2 normalized() const {
    double n = norm();
    if (n == 0.0) throw std::invalid_argument("cannot normalize zero vector");
    return {x / n, y / n};
  }
  // rotate by +90 degrees
  Vec2 perp() const { return {-y, x}; }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

struct Mat2 {
  // row-major: [[a, b], [c, d]]
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  Mat2() = default;
  Mat2(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {}

  static Mat2 identity() { return {1, 0, 0, 1}; }

  Vec2 apply(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d,
            c * o.a + d * o.c, c * o.b + d * o.d};
  }
  Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }
  Mat2 transpose() const { return {a, c, b, d}; }
  Mat2 inverse() const {
    double dt = det();
    if (dt == 0.0) throw std::domain_error("singular 2x2 matrix");
    return {d / dt, -b / dt, -c / dt, a / dt};
  }
  // operator norm (largest singular value)
  double op_norm() const;
  // Frobenius norm
  double frob() const { return std::sqrt(a * a + b * b + c * c + d * d); }
};

// Symmetric bilinear form on R^2 (one component of a second derivative).
struct Sym2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;
  double apply(const Vec2& u, const Vec2& v) const {
    return xx * u.x * v.x + xy * (u.x * v.y + u.y * v.x) + yy * u.y * v.y;
  }
  double op_norm() const {
    // eigenvalue of largest magnitude
    double m = 0.5 * (xx + yy);
    double r = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
    return std::max(std::abs(m + r), std::abs(m - r));
  }
  Sym2 operator+(const Sym2& o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }
  Sym2 operator*(double s) const { return {xx * s, xy * s, yy * s}; }
};

// Pair of symmetric forms: the full second derivative of a map R^2 -> R^2.
struct SecondDeriv {
  Sym2 fx, fy;  // Hessians of the two components
  Vec2 apply(const Vec2& u, const Vec2& v) const {
    return {fx.apply(u, v), fy.apply(u, v)};
  }
  double op_norm() const { return std::sqrt(fx.op_norm() * fx.op_norm() + fy.op_norm() * fy.op_norm()); }
};

struct TorusPoint {
  double x = 0.0, y = 0.0;  // both in [0,1)
  TorusPoint() = default;
  TorusPoint(double x_, double y_);
  Vec2 as_vec() const { return {x, y}; }
};

// Reduce a planar point mod 1 into [0,1)^2.
TorusPoint wrap(const Vec2& p);

// Component-wise nearest representative of q - p, each in [-1/2, 1/2).
Vec2 wrap_diff(const TorusPoint& p, const TorusPoint& q);

// Shortest wrapped Euclidean distance; at most sqrt(2)/2.
double dist(const TorusPoint& p, const TorusPoint& q);

// A line through the origin, stored as a unit vector with canonical sign
// (first component positive; if |x| is negligible, y positive).
struct ProjectiveDirection {
  Vec2 v;  // unit, canonical sign
  explicit ProjectiveDirection(const Vec2& raw);
  ProjectiveDirection() : v(1.0, 0.0) {}
};

// Angle between two lines, in [0, pi/2]. Symmetric, zero iff proportional.
double proj_angle(const ProjectiveDirection& a, const ProjectiveDirection& b);
double proj_angle(const Vec2& a, const Vec2& b);

// Closed-form singular decomposition of a 2x2 matrix via the Jacobi angle
// on M^T M. su >= ss >= 0; u_in/s_in are the input (right) singular
// directions, u_out the image direction of u_in.
struct Svd2 {
  double su = 0.0, ss = 0.0;
  Vec2 u_in, s_in, u_out, s_out;
  bool defined = false;  // su/ss > 1 + 1e-9
};
Svd2 svd2(const Mat2& m);

}  // namespace rdslab
