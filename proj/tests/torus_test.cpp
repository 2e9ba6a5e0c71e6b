#include <doctest.h>

#include <cmath>

#include "rdslab/rng.hpp"
#include "rdslab/torus.hpp"

using namespace rdslab;

TEST_CASE("wrap lands in the unit square and is 1-periodic") {
  Xoshiro256pp rng(derive_seed(7, "wrap"));
  for (int i = 0; i < 1000; ++i) {
    Vec2 v{20.0 * (rng.next_double() - 0.5), 20.0 * (rng.next_double() - 0.5)};
    TorusPoint p = wrap(v);
    CHECK(p.x >= 0.0);
    CHECK(p.x < 1.0);
    CHECK(p.y >= 0.0);
    CHECK(p.y < 1.0);
    TorusPoint q = wrap(v + Vec2{3.0, -5.0});
    CHECK(dist(p, q) < 1e-12);
  }
}

TEST_CASE("wrap_diff returns the nearest representative") {
  TorusPoint a(0.95, 0.1), b(0.05, 0.9);
  Vec2 d = wrap_diff(a, b);
  CHECK(d.x == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(d.y == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(dist(a, b) == doctest::Approx(d.norm()));
}

TEST_CASE("distance properties: symmetry, triangle, diameter bound") {
  Xoshiro256pp rng(derive_seed(7, "dist"));
  for (int i = 0; i < 500; ++i) {
    TorusPoint a(rng.next_double(), rng.next_double());
    TorusPoint b(rng.next_double(), rng.next_double());
    TorusPoint c(rng.next_double(), rng.next_double());
    CHECK(dist(a, b) == doctest::Approx(dist(b, a)));
    CHECK(dist(a, c) <= dist(a, b) + dist(b, c) + 1e-12);
    CHECK(dist(a, b) <= std::sqrt(2.0) / 2.0 + 1e-12);
  }
}

TEST_CASE("projective directions have canonical sign") {
  ProjectiveDirection d1(Vec2{-0.3, 0.7});
  ProjectiveDirection d2(Vec2{0.3, -0.7});
  CHECK(d1.v.x == doctest::Approx(d2.v.x));
  CHECK(d1.v.y == doctest::Approx(d2.v.y));
  CHECK(std::abs(d1.v.norm() - 1.0) < 1e-14);
  CHECK(proj_angle(d1, d2) < 1e-12);
}

TEST_CASE("svd2 matches a 360-direction scan of extreme stretch") {
  Xoshiro256pp rng(derive_seed(7, "svd"));
  for (int trial = 0; trial < 200; ++trial) {
    Mat2 m{4.0 * (rng.next_double() - 0.5), 4.0 * (rng.next_double() - 0.5),
           4.0 * (rng.next_double() - 0.5), 4.0 * (rng.next_double() - 0.5)};
    Svd2 s = svd2(m);
    double lo = 1e300, hi = 0.0;
    for (int k = 0; k < 360; ++k) {
      double th = 3.14159265358979323846 * k / 360.0;
      double st = m.apply(Vec2{std::cos(th), std::sin(th)}).norm();
      lo = std::min(lo, st);
      hi = std::max(hi, st);
    }
    CHECK(s.su == doctest::Approx(hi).epsilon(1e-3));
    CHECK(s.ss == doctest::Approx(lo).epsilon(1e-3));
    if (s.defined) {
      // input singular directions achieve the extremes
      CHECK(m.apply(s.u_in).norm() == doctest::Approx(s.su).epsilon(1e-9));
      CHECK(m.apply(s.s_in).norm() == doctest::Approx(s.ss).epsilon(1e-9));
      // singular value product equals |det|
      CHECK(s.su * s.ss == doctest::Approx(std::abs(m.det())).epsilon(1e-9));
    }
  }
}

TEST_CASE("svd2 flags near-conformal matrices as undefined") {
  Svd2 rot = svd2(Mat2{0.0, -1.0, 1.0, 0.0});
  CHECK(!rot.defined);
  CHECK(rot.su == doctest::Approx(1.0));
}
