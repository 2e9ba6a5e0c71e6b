#include "rdslab/torus.hpp"

#include <algorithm>

namespace rdslab {

static double mod1(double v) {
  double r = v - std::floor(v);
  if (r >= 1.0) r -= 1.0;  // guards v = -eps rounding to 1.0
  if (r < 0.0) r += 1.0;
  return r;
}

TorusPoint::TorusPoint(double x_, double y_) {
  if (!std::isfinite(x_) || !std::isfinite(y_))
    throw std::invalid_argument("non-finite torus coordinate");
  x = mod1(x_);
  y = mod1(y_);
}

TorusPoint wrap(const Vec2& p) { return TorusPoint(p.x, p.y); }

static double axis_diff(double a, double b) {
  double d = b - a;
  d -= std::round(d);
  if (d == 0.5) d = -0.5;  // keep in [-1/2, 1/2)
  return d;
}

Vec2 wrap_diff(const TorusPoint& p, const TorusPoint& q) {
  return {axis_diff(p.x, q.x), axis_diff(p.y, q.y)};
}

double dist(const TorusPoint& p, const TorusPoint& q) {
  double dx = std::abs(p.x - q.x);
  double dy = std::abs(p.y - q.y);
  dx = std::min(dx, 1.0 - dx);
  dy = std::min(dy, 1.0 - dy);
  return std::sqrt(dx * dx + dy * dy);
}

ProjectiveDirection::ProjectiveDirection(const Vec2& raw) {
  if (!raw.finite() || raw.norm2() == 0.0)
    throw std::invalid_argument("projective direction needs a nonzero vector");
  Vec2 u = raw.normalized();
  // canonical sign: first component of sufficient size positive, else second
  if (u.x < 0.0 || (std::abs(u.x) < 1e-14 && u.y < 0.0)) u = -u;
  v = u;
}

double proj_angle(const Vec2& a, const Vec2& b) {
  Vec2 ua = a.normalized(), ub = b.normalized();
  double c = std::abs(ua.dot(ub));
  double s = std::abs(ua.cross(ub));
  return std::atan2(s, c);  // in [0, pi/2]
}

double proj_angle(const ProjectiveDirection& a, const ProjectiveDirection& b) {
  return proj_angle(a.v, b.v);
}

double Mat2::op_norm() const { return svd2(*this).su; }

Svd2 svd2(const Mat2& m) {
  // symmetric eigenproblem for T = M^T M
  double t00 = m.a * m.a + m.c * m.c;
  double t01 = m.a * m.b + m.c * m.d;
  double t11 = m.b * m.b + m.d * m.d;
  double tr = t00 + t11;
  double gap = std::sqrt((t00 - t11) * (t00 - t11) + 4.0 * t01 * t01);
  double mu_max = 0.5 * (tr + gap);
  double mu_min = 0.5 * (tr - gap);
  if (mu_min < 0.0) mu_min = 0.0;  // clamp rounding

  Svd2 out;
  out.su = std::sqrt(mu_max);
  // (tr - gap)/2 cancels badly when the split is large; |det| / su is the
  // well-conditioned route to the small singular value
  out.ss = out.su > 0.0 ? std::abs(m.det()) / out.su : std::sqrt(mu_min);

  // Jacobi angle diagonalizes T; pick the eigenvector assignment robustly.
  double theta = 0.5 * std::atan2(2.0 * t01, t00 - t11);
  Vec2 e1(std::cos(theta), std::sin(theta));
  Vec2 e2 = e1.perp();
  // e1 corresponds to mu_max when t00 - t11 >= 0 branch of atan2; verify by
  // Rayleigh quotient and swap if needed.
  double q1 = t00 * e1.x * e1.x + 2 * t01 * e1.x * e1.y + t11 * e1.y * e1.y;
  double q2 = t00 * e2.x * e2.x + 2 * t01 * e2.x * e2.y + t11 * e2.y * e2.y;
  if (q2 > q1) std::swap(e1, e2);

  out.u_in = e1;
  out.s_in = e2;
  Vec2 img_u = m.apply(e1);
  Vec2 img_s = m.apply(e2);
  out.u_out = img_u.norm() > 0 ? img_u.normalized() : e1;
  out.s_out = img_s.norm() > 0 ? img_s.normalized() : e2;
  out.defined = (out.ss > 0.0) && (out.su / out.ss > 1.0 + 1e-9);
  return out;
}

}  // namespace rdslab
