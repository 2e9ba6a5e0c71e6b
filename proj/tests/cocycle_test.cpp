#include <doctest.h>

#include <cmath>

#include "rdslab/cocycle.hpp"

using namespace rdslab;

TEST_CASE("one-step averaged expansion at the diagonal witness") {
  DrivingMeasure mu = make_ab_system(0.0);
  // v = (1,-1)/sqrt(2): both shears halve the squared norm, so the
  // averaged one-step log expansion is exactly -(ln 2)/2
  Vec2 v{1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
  double got = uef_value(mu, 1, TorusPoint(0.37, 0.58), v);
  CHECK(std::abs(got - (-0.5 * std::log(2.0))) < 1e-12);
}

TEST_CASE("singular data matches direct expansion extremes") {
  DrivingMeasure mu = make_ab_system(0.01);
  Xoshiro256pp rng(derive_seed(13, "sing"));
  for (int i = 0; i < 50; ++i) {
    Word w = mu.sample_word(10, rng);
    TorusPoint p(rng.next_double(), rng.next_double());
    CocycleTip tip = cocycle_tip(mu, w, p);
    SingularData sd = singular_data(tip.product);
    REQUIRE(sd.defined);
    CHECK(sd.lambda_u * sd.lambda_s ==
          doctest::Approx(std::abs(tip.product.det())).epsilon(1e-9));
    CHECK(tip.product.apply(sd.e_u.v).norm() ==
          doctest::Approx(sd.lambda_u).epsilon(1e-9));
    CHECK(tip.product.apply(sd.e_s.v).norm() ==
          doctest::Approx(sd.lambda_s).epsilon(1e-9));
  }
}

TEST_CASE("pulled unstable direction is equivariant") {
  // V^u(x) for word w equals Df^n at the preimage applied to E^u there;
  // appending a letter g maps V^u_w to Dg V^u (up to the new word's split)
  DrivingMeasure mu = make_ab_system(0.0);
  Xoshiro256pp rng(derive_seed(13, "pulled"));
  for (int i = 0; i < 20; ++i) {
    Word w = mu.sample_word(14, rng);
    TorusPoint x(rng.next_double(), rng.next_double());
    auto vu = pulled_unstable(mu, w, x);
    REQUIRE(vu.has_value());
    // the pulled direction is strongly expanded by one more typical letter
    const Diffeo& g = mu.atom(0);
    Vec2 img = g.deriv(x).apply(vu->v);
    CHECK(img.norm() >= 0.5);  // never crushed: it is far from stable lines
  }
}

TEST_CASE("forward and inverse certificates agree on a tiny scan") {
  DrivingMeasure mu = make_ab_system(0.0);
  ExpansionReport fwd = certify_uef(mu, 10, 3, 3, 8);
  ExpansionReport bwd = certify_uep(mu, 10, 3, 3, 8);
  CHECK(fwd.pairs_checked == 72);
  // constant-matrix system: forward/backward products are transposes in
  // distribution, so the worst averages coincide
  CHECK(fwd.worst == doctest::Approx(bwd.worst).epsilon(1e-9));
}

TEST_CASE("moment decay is positive and bracketed by its bootstrap CI") {
  DrivingMeasure mu = make_ab_system(0.0);
  auto r = moment_decay(mu, 0.1, 10, 16, 99, 50);
  CHECK(r.sup_moment.size() == 10);
  CHECK(r.chi_hat_lo <= r.chi_hat);
  CHECK(r.chi_hat <= r.chi_hat_hi);
  for (double m : r.sup_moment) CHECK(m > 0.0);
}

TEST_CASE("markov conditioning identity holds exactly") {
  DrivingMeasure mu = make_ab_system(0.01);
  double res = moment_markov_residual(mu, 0.1, 6, TorusPoint(0.2, 0.9),
                                      Vec2{0.6, 0.8});
  CHECK(res < 1e-12);
}

TEST_CASE("angle tail estimator sees no thin-angle mass for short words") {
  DrivingMeasure mu = make_ab_system(0.0);
  auto r = angle_tail(mu, 8, 2000, AngleMode::kFixedDirection, 4, 50);
  CHECK(r.samples + r.undefined == 2000);
  // tail probabilities are monotone in the threshold
  for (size_t i = 1; i < r.tail_prob.size(); ++i)
    CHECK(r.tail_prob[i] <= r.tail_prob[i - 1] + 1e-12);
}

TEST_CASE("volume-preserving words always pass the jacobian range test") {
  DrivingMeasure mu = make_ab_system(0.01);
  CHECK(jac_range_freq(mu, 10, 0.1, 1e-3, 4, 4, 50, 5) == doctest::Approx(1.0));
}
