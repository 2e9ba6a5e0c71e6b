#include "rdslab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdslab {

static constexpr double kTwoPi = 6.283185307179586476925286766559;

Diffeo::Diffeo(const Mat2& linear, std::vector<FourierMode> modes, std::string name)
    : lin_(linear), modes_(std::move(modes)), name_(std::move(name)) {
  double dt = lin_.det();
  if (std::abs(std::abs(dt) - 1.0) > 1e-12)
    throw std::invalid_argument("linear part must have |det| = 1");
  lin_inv_ = lin_.inverse();
  pert_c1_ = perturbation_deriv_bound(1);
  if (pert_c1_ >= 1.0)
    throw std::invalid_argument(
        "perturbation C1 size must be < 1 for certified invertibility");
}

double Diffeo::perturbation_deriv_bound(int r) const {
  double s = 0.0;
  for (const auto& m : modes_) {
    double kn = std::sqrt(double(m.kx) * m.kx + double(m.ky) * m.ky);
    s += m.a.norm() * std::pow(kTwoPi * kn, r);
  }
  return s;
}

Vec2 Diffeo::eval_lift(const Vec2& p) const {
  Vec2 out = lin_.apply(p);
  for (const auto& m : modes_) {
    double arg = kTwoPi * (m.kx * p.x + m.ky * p.y) + m.phi;
    out = out + m.a * std::sin(arg);
  }
  return out;
}

TorusPoint Diffeo::eval(const TorusPoint& p) const {
  return wrap(eval_lift(p.as_vec()));
}

Mat2 Diffeo::deriv(const TorusPoint& p) const {
  Mat2 D = lin_;
  for (const auto& m : modes_) {
    double arg = kTwoPi * (m.kx * p.x + m.ky * p.y) + m.phi;
    double c = kTwoPi * std::cos(arg);
    D = D + Mat2{m.a.x * m.kx * c, m.a.x * m.ky * c,
                 m.a.y * m.kx * c, m.a.y * m.ky * c};
  }
  return D;
}

Jet Diffeo::jet(const TorusPoint& p) const {
  Jet j;
  j.image = eval(p);
  j.D = lin_;
  for (const auto& m : modes_) {
    double arg = kTwoPi * (m.kx * p.x + m.ky * p.y) + m.phi;
    double c = kTwoPi * std::cos(arg);
    double s = -kTwoPi * kTwoPi * std::sin(arg);
    j.D = j.D + Mat2{m.a.x * m.kx * c, m.a.x * m.ky * c,
                     m.a.y * m.kx * c, m.a.y * m.ky * c};
    Sym2 h{double(m.kx) * m.kx * s, double(m.kx) * m.ky * s,
           double(m.ky) * m.ky * s};
    j.D2.fx = j.D2.fx + h * m.a.x;
    j.D2.fy = j.D2.fy + h * m.a.y;
  }
  return j;
}

double Diffeo::jacobian(const TorusPoint& p) const {
  return std::abs(deriv(p).det());
}

TorusPoint Diffeo::inverse_eval(const TorusPoint& q) const {
  TorusPoint p = wrap(lin_inv_.apply(q.as_vec()));
  for (int it = 0; it < 64; ++it) {
    TorusPoint fp = eval(p);
    Vec2 res = wrap_diff(q, fp);  // f(p) - q, nearest representative
    if (res.norm() < 1e-13) return p;
    Mat2 D = deriv(p);
    Vec2 step = D.inverse().apply(res);
    p = wrap(p.as_vec() - step);
  }
  if (dist(eval(p), q) < 1e-12) return p;
  throw std::runtime_error("Newton inverse failed to converge (invariant violation)");
}

static Sym2 congruence(const Sym2& s, const Mat2& b) {
  // (u,v) -> s(Bu, Bv), as a symmetric form
  // S' = B^T S B with S = [[xx, xy], [xy, yy]]
  double m00 = s.xx * b.a + s.xy * b.c;
  double m01 = s.xx * b.b + s.xy * b.d;
  double m10 = s.xy * b.a + s.yy * b.c;
  double m11 = s.xy * b.b + s.yy * b.d;
  return {b.a * m00 + b.c * m10, b.a * m01 + b.c * m11, b.b * m01 + b.d * m11};
}

double Diffeo::c2_bound(int grid_n) const {
  if (grid_n < 16) throw std::invalid_argument("c2_bound needs grid_n >= 16");
  double sup = 1.0;
  double sup_dinv = 1.0;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      TorusPoint p((i + 0.5) / grid_n, (j + 0.5) / grid_n);
      Jet jt = jet(p);
      Mat2 Binv = jt.D.inverse();
      sup = std::max({sup, jt.D.op_norm(), jt.D2.op_norm()});
      double dinv = Binv.op_norm();
      sup_dinv = std::max(sup_dinv, dinv);
      sup = std::max(sup, dinv);
      // second derivative of the inverse at the image point:
      // D2(f^-1)(u,v) = -Df^-1 . D2f(Df^-1 u, Df^-1 v)
      Sym2 hx = congruence(jt.D2.fx, Binv);
      Sym2 hy = congruence(jt.D2.fy, Binv);
      SecondDeriv d2inv;
      d2inv.fx = hx * (-Binv.a) + hy * (-Binv.b);
      d2inv.fy = hx * (-Binv.c) + hy * (-Binv.d);
      sup = std::max(sup, d2inv.op_norm());
    }
  }
  // Lipschitz safety margin from the analytic derivative budgets; the inverse
  // quantities amplify by powers of sup |Df^-1|.
  double h = 1.0 / grid_n;
  double lip = (perturbation_deriv_bound(2) + perturbation_deriv_bound(3) + 1.0) *
               std::pow(1.0 + sup_dinv, 3);
  return sup + 0.75 * h * lip;
}

DrivingMeasure::DrivingMeasure(std::vector<Diffeo> support, std::vector<double> probs)
    : support_(std::move(support)), probs_(std::move(probs)) {
  if (support_.empty() || support_.size() != probs_.size())
    throw std::invalid_argument("driving measure needs matching nonempty atoms");
  double s = 0.0;
  for (double p : probs_) {
    if (p <= 0.0) throw std::invalid_argument("atom probabilities must be positive");
    s += p;
  }
  if (std::abs(s - 1.0) > 1e-12)
    throw std::invalid_argument("atom probabilities must sum to 1");
}

Word DrivingMeasure::sample_word(size_t n, Xoshiro256pp& rng) const {
  Word w;
  w.indices.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    double u = rng.next_double();
    double acc = 0.0;
    uint32_t pick = uint32_t(probs_.size() - 1);
    for (uint32_t k = 0; k < probs_.size(); ++k) {
      acc += probs_[k];
      if (u < acc) {
        pick = k;
        break;
      }
    }
    w.indices.push_back(pick);
  }
  return w;
}

double DrivingMeasure::word_weight(const Word& w) const {
  double p = 1.0;
  for (uint32_t i : w.indices) p *= probs_.at(i);
  return p;
}

std::vector<WeightedWord> DrivingMeasure::enumerate_words(size_t n, size_t cap) const {
  double total = std::pow(double(arity()), double(n));
  if (total > double(cap))
    throw std::runtime_error(
        "word enumeration cap exceeded; use Monte Carlo sampling instead");
  size_t count = size_t(total + 0.5);
  std::vector<WeightedWord> out;
  out.reserve(count);
  Word w;
  w.indices.assign(n, 0);
  for (size_t idx = 0; idx < count; ++idx) {
    out.push_back({w, word_weight(w)});
    // odometer increment
    for (size_t pos = 0; pos < n; ++pos) {
      if (++w.indices[pos] < arity()) break;
      w.indices[pos] = 0;
    }
  }
  return out;
}

CocycleResult cocycle(const DrivingMeasure& mu, const Word& w, const TorusPoint& p) {
  CocycleResult r;
  size_t n = w.size();
  r.trajectory.reserve(n + 1);
  r.products.reserve(n + 1);
  r.log_jacobians.reserve(n + 1);
  r.trajectory.push_back(p);
  r.products.push_back(Mat2::identity());
  r.log_jacobians.push_back(0.0);
  TorusPoint x = p;
  Mat2 prod = Mat2::identity();
  double lj = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const Diffeo& f = mu.atom(w.indices[k]);
    Mat2 D = f.deriv(x);
    x = f.eval(x);
    prod = D * prod;
    lj += std::log(std::abs(D.det()));
    r.trajectory.push_back(x);
    r.products.push_back(prod);
    r.log_jacobians.push_back(lj);
  }
  return r;
}

CocycleTip cocycle_tip(const DrivingMeasure& mu, const Word& w, const TorusPoint& p) {
  CocycleTip t;
  t.end = p;
  t.product = Mat2::identity();
  for (uint32_t i : w.indices) {
    const Diffeo& f = mu.atom(i);
    Mat2 D = f.deriv(t.end);
    t.end = f.eval(t.end);
    t.product = D * t.product;
    t.log_jac += std::log(std::abs(D.det()));
  }
  return t;
}

TorusPoint word_preimage(const DrivingMeasure& mu, const Word& w, const TorusPoint& x) {
  TorusPoint p = x;
  for (size_t k = w.size(); k-- > 0;) {
    p = mu.atom(w.indices[k]).inverse_eval(p);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Constants

double Constants::C2() const { return std::log(4.0 * std::exp(1.0) / 3.0); }
double Constants::chi() const { return delta * C1 / (2.0 * N); }
double Constants::lambda() const { return chi() / delta; }
double Constants::lambdabar() const { return chibar / delta; }
double Constants::lambdahat() const { return std::min(lambdabar() / 2.0, 1.0); }

double Constants::beta1prime() const {
  return std::min(1.0 / (4.0 * C0p), (chi() - chibar) / (4.0 * C0p));
}
double Constants::beta1() const {
  return std::min({beta1prime(), 1.0, chi() - chibar});
}
double Constants::C6() const {
  return C1prime() + std::exp(C2() + 4.0 / delta) + C3 * std::pow(4.0, beta1()) + 1.0;
}
double Constants::beta2() const { return lambdahat() * beta1() / 16.0; }

double Constants::K1prime(double rate) const {
  double e5p = std::expm1(5.0 * p0 * C0p);  // e^{5 p0 C0p} - 1
  double e5 = std::expm1(5.0 * C0p);
  return std::exp(3.0 * C0p + 10.0 * p0 * C0p) / (e5p * e5) + 1.0 +
         std::exp(3.0 * C0p + 5.0 * p0 * C0p) / ((1.0 - std::exp(-rate * p0)) * e5);
}
double Constants::K1(double rate) const {
  double e5 = std::expm1(5.0 * C0p);
  return std::exp(6.0 * p0 * C0p) * K1prime(rate) +
         (std::exp((5.0 * p0 + 3.0) * C0p) - std::exp(3.0 * C0p)) / e5;
}
double Constants::K2(double rate) const {
  double k1 = K1(rate);
  double k2p = 2.0 * p0 * k1 * std::exp((2.0 + p0) * C0p);
  double k2pp = 1.0 + k2p * (std::exp(4.0 * p0 * C0p) / std::expm1(2.0 * p0 * C0p) +
                             std::exp(rate * p0) / (1.0 - std::exp(-rate * p0 / 2.0)));
  return std::exp(p0 * C0p) * k2pp + 2.0 * p0 * std::exp((3.0 + 2.0 * p0) * C0p) * k1;
}
double Constants::Kpp() const {
  return K1(lambdabar()) * (K_seed + 1.0) * std::exp(8.0 * p0 * C0p);
}
double Constants::Lpp() const {
  return K2(lambdabar()) * (K_seed + 1.0) * (L_seed + 1.0) * std::exp(11.0 * p0 * C0p);
}

static void push_check(std::vector<Constants::Check>& v, const std::string& name,
                       double lhs, double rhs, bool strict = true) {
  v.push_back({name, strict ? lhs < rhs : lhs <= rhs, lhs, rhs});
}

std::vector<Constants::Check> Constants::validate() const {
  std::vector<Check> v;
  push_check(v, "delta > 0", 0.0, delta);
  push_check(v, "delta < 1/(N*C0p)", delta, 1.0 / (N * C0p));
  push_check(v, "delta < 1/(2*C1)", delta, 1.0 / (2.0 * C1));
  push_check(v, "delta < C1/(2*(N*C0p)^2)", delta, C1 / (2.0 * N * C0p * N * C0p));
  push_check(v, "chibar > 0", 0.0, chibar);
  push_check(v, "chibar < chi", chibar, chi());
  push_check(v, "chibar < delta*C0p/2", chibar, delta * C0p / 2.0);
  push_check(v, "eps0 < C0", eps0, C0);
  push_check(v, "eps0 < C0p", eps0, C0p);
  push_check(v, "eps0 < chibar/(2*delta)", eps0, chibar / (2.0 * delta));
  push_check(v, "eps0 < lambdabar/8", eps0, lambdabar() / 8.0);
  push_check(v, "eps0 < lambdahat*beta1/7", eps0, lambdahat() * beta1() / 7.0);
  // curvature-tail parameter window
  push_check(v, "eps0 < c/2", eps0, c / 2.0);
  push_check(v, "c < C0p", c, C0p);
  push_check(v, "eta > C0/(C0p*p0)", C0 / (C0p * p0), eta);
  push_check(v, "eta < c/(2c+6*C0p)", eta, c / (2.0 * c + 6.0 * C0p));
  // density-tail window (stricter)
  push_check(v, "eta < c/(2c+16*C0p)", eta, c / (2.0 * c + 16.0 * C0p));
  // pipeline window
  push_check(v, "eta < (lambda-lambdabar)/beta1", eta, (lambda() - lambdabar()) / beta1());
  push_check(v, "eta < 1/beta1", eta, 1.0 / beta1());
  push_check(v, "eta < 1/13", eta, 1.0 / 13.0);
  push_check(v, "eta < lambdahat*beta1/112", eta, lambdahat() * beta1() / 112.0);
  push_check(v, "eta < lhat*b1/(3328*C0p+2*lhat*b1)", eta,
             lambdahat() * beta1() / (3328.0 * C0p + 2.0 * lambdahat() * beta1()));
  push_check(v, "eta < lambdabar/(13*C0p)", eta, lambdabar() / (13.0 * C0p));
  // mass-retention horizon: p0 >= p_star(eta, lambdabar, c_retention)
  double astar = 0.0;
  for (double a = 0.01; a < 400.0; a += 0.01) {
    double lhs = Cpp4 * std::exp(-a * eta) /
                 ((1.0 - std::exp(-a)) * (1.0 - std::exp(-a * eta)));
    if (lhs < c_retention) {
      astar = a;
      break;
    }
  }
  double entropy = eta * std::log(eta) + (1.0 - eta) * std::log(1.0 - eta);
  double pstar = (astar <= 0.0)
                     ? std::numeric_limits<double>::infinity()
                     : (std::log(C6()) + astar - entropy / eta) / (beta1() * eta);
  push_check(v, "p0 >= p_star(eta,lambdabar,c)", pstar, double(p0), false);
  return v;
}

bool Constants::valid() const {
  for (const auto& ch : validate())
    if (!ch.ok) return false;
  return true;
}

// ---------------------------------------------------------------------------

DrivingMeasure make_ab_system(double pert) {
  std::vector<FourierMode> modes_a, modes_b;
  if (pert != 0.0) {
    modes_a.push_back({0, 1, Vec2{pert, 0.0}, 0.0});
    modes_b.push_back({1, 0, Vec2{0.0, pert}, 0.0});
  }
  std::vector<Diffeo> atoms;
  atoms.emplace_back(Mat2{1, 1, 0, 1}, modes_a, "shear-x");
  atoms.emplace_back(Mat2{1, 0, 1, 1}, modes_b, "shear-y");
  return DrivingMeasure(std::move(atoms), {0.5, 0.5});
}

Diffeo make_cat_map() { return Diffeo(Mat2{2, 1, 1, 1}, {}, "cat"); }

}  // namespace rdslab
