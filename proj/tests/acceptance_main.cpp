// Acceptance gate: one line per criterion, PASS/FAIL, nonzero exit when any
// criterion fails. Tolerances are pinned here on purpose; do not relax them
// to make a run green.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "rdslab/admissible.hpp"
#include "rdslab/cocycle.hpp"
#include "rdslab/curves.hpp"
#include "rdslab/dynamics.hpp"
#include "rdslab/lab.hpp"
#include "rdslab/rng.hpp"
#include "rdslab/seminorm.hpp"

using namespace rdslab;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr uint64_t kSeed = 20260826;

int failures = 0;

void verdict(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("A%02d %-4s %-34s %s\n", id, ok ? "PASS" : "FAIL", name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

PointCloudMeasure uniform_cloud(size_t n, uint64_t seed) {
  Xoshiro256pp rng(derive_seed(seed, "accept-cloud"));
  PointCloudMeasure m;
  m.atoms.reserve(n);
  for (size_t i = 0; i < n; ++i)
    m.atoms.push_back({TorusPoint(rng.next_double(), rng.next_double()), 1.0 / n});
  return m;
}

// --- criterion 1: analytic values of the correlation norm -------------------
void c01_norm_analytics() {
  PointCloudMeasure leb = uniform_cloud(1000000, kSeed);
  double v_leb = rho_norm(leb, 0.05, 4);
  bool ok_leb = std::abs(v_leb - kPi) / kPi <= 0.02;

  PointCloudMeasure dirac;
  dirac.atoms.push_back({TorusPoint(0.41, 0.67), 1.0});
  double rho_d = 0.05;
  double v_dir = rho_norm(dirac, rho_d, 16);
  double t_dir = std::sqrt(kPi) / rho_d;
  bool ok_dir = std::abs(v_dir - t_dir) / t_dir <= 0.01;

  // unit-length circle (radius 1/2pi) carrying mass 1: norm 4/sqrt(3 rho)
  PointCloudMeasure circ;
  const size_t nc = 100000;
  const double r = 1.0 / (2.0 * kPi);
  for (size_t i = 0; i < nc; ++i) {
    double t = 2.0 * kPi * (i + 0.5) / nc;
    circ.atoms.push_back(
        {wrap(Vec2{0.5 + r * std::cos(t), 0.5 + r * std::sin(t)}), 1.0 / nc});
  }
  double rho_c = 0.0125;
  double v_cir = rho_norm(circ, rho_c, 16);
  double t_cir = 4.0 / std::sqrt(3.0 * rho_c);
  bool ok_cir = std::abs(v_cir - t_cir) / t_cir <= 0.05;

  verdict(1, "correlation-norm analytic values", ok_leb && ok_dir && ok_cir,
          fmt("leb %.4f vs %.4f, atom %.2f vs %.2f, circle %.2f vs %.2f", v_leb, kPi,
              v_dir, t_dir, v_cir, t_cir));
}

// --- criterion 2: variable-radius vs fixed-radius comparison ----------------
void c02_variable_radius() {
  const double N0 = 19.0;
  const double C4 = 4.0 * N0 * N0 * (1089.0 + 8712.0 * (1.0 + std::log(2.0)));
  Xoshiro256pp rng(derive_seed(kSeed, "varnorm"));
  size_t violations = 0;
  double tightest = 1e300;
  for (int trial = 0; trial < 50; ++trial) {
    // mixture of a uniform blanket and a tight cluster
    PointCloudMeasure m = uniform_cloud(4000, kSeed + trial);
    double cx = rng.next_double(), cy = rng.next_double(), spread = 0.02;
    for (int i = 0; i < 4000; ++i) {
      m.atoms.push_back({wrap(Vec2{cx + spread * (rng.next_double() - 0.5),
                                   cy + spread * (rng.next_double() - 0.5)}),
                         1.0 / 8000.0});
      m.atoms[i].w = 1.0 / 8000.0;
    }
    double rho = 0.05 + 0.05 * rng.next_double();
    double dmin = rho / (1.5 + 2.5 * rng.next_double());
    double ax = 1.0 + rng.next_below(3), by = 1.0 + rng.next_below(3);
    double ph = 2.0 * kPi * rng.next_double();
    auto delta = [&](const TorusPoint& p) {
      double s = 0.5 + 0.5 * std::sin(2.0 * kPi * (ax * p.x + by * p.y) + ph);
      return dmin + (rho - dmin) * s;
    };
    double lhs = var_norm_sq(m, delta, dmin, rho, 4);
    double rhs = C4 * (1.0 + std::log(rho / dmin)) * rho_inner(m, m, rho, 4);
    if (lhs > rhs) ++violations;
    tightest = std::min(tightest, rhs / std::max(lhs, 1e-300));
  }
  verdict(2, "variable-radius norm comparison", violations == 0,
          fmt("violations %zu/50, min slack factor %.3g", violations, tightest));
}

// --- criterion 3: curvature transport ---------------------------------------
void c03_curvature() {
  DrivingMeasure mu = make_ab_system(0.01);
  Xoshiro256pp rng(derive_seed(kSeed, "curvfd"));
  double worst_fd = 0.0;
  for (int i = 0; i < 100; ++i) {
    Word w = mu.sample_word(1 + rng.next_below(3), rng);
    TorusPoint p(rng.next_double(), rng.next_double());
    double th = kPi * rng.next_double();
    Vec2 t{std::cos(th), std::sin(th)};
    // analytic image curvature of a straight germ through p with tangent t
    Mat2 P = Mat2::identity();
    SecondDeriv H;  // second derivative of the composition along the germ
    // propagate the jet through the word step by step
    TorusPoint x = p;
    Vec2 tan = t;
    double kappa = 0.0;
    for (uint32_t idx : w.indices) {
      Jet j = mu.atom(idx).jet(x);
      Vec2 Dt = j.D.apply(tan);
      double sp = Dt.norm();
      kappa = (kappa * j.D.det() + Dt.cross(j.D2.apply(tan, tan))) / (sp * sp * sp);
      tan = Dt * (1.0 / sp);
      x = j.image;
      P = j.D * P;
      (void)H;
    }
    // oracle: three exact lift evaluations of the composed word map
    const double h = 1e-4;
    auto lift_word = [&](const Vec2& q) {
      Vec2 y = q;
      for (uint32_t idx : w.indices) y = mu.atom(idx).eval_lift(y);
      return y;
    };
    Vec2 base{p.x, p.y};
    Vec2 a = lift_word(base - t * h), b = lift_word(base), c = lift_word(base + t * h);
    Vec2 u = b - a, v = c - b;
    double disc = 2.0 * u.cross(v) / (u.norm() * v.norm() * (c - a).norm());
    worst_fd = std::max(worst_fd, std::abs(disc - kappa) / (1.0 + std::abs(kappa)));
  }
  bool ok_fd = worst_fd <= 1e-5;

  size_t violations = 0;
  Constants cst;
  cst.p0 = 8;
  cst.eta = 0.25;
  double worst_ratio = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Word w = mu.sample_word(8, rng);
    Vec2 a{0.1 + 0.8 * rng.next_double(), 0.1 + 0.8 * rng.next_double()};
    double th = kPi * rng.next_double();
    Curve c = make_segment(a, a + Vec2{0.02 * std::cos(th), 0.02 * std::sin(th)}, 5e-3);
    auto audit = curvature_growth_audit(mu, w, c, cst);
    worst_ratio = std::max(worst_ratio, audit.worst_ratio);
    if (!audit.ok) ++violations;
  }
  verdict(3, "curvature transport and growth bound", ok_fd && violations == 0,
          fmt("fd err %.2e (tol 1e-5), bound violations %zu/1000, worst ratio %.2e",
              worst_fd, violations, worst_ratio));
}

// --- criterion 4: uniform expansion certificates -----------------------------
struct ScanResult {
  double worst = 1e300;
  TorusPoint worst_p;
  Vec2 worst_v;
};

ScanResult exact_scan(const DrivingMeasure& mu, size_t N, size_t grid, size_t ndir) {
  std::vector<Vec2> dirs(ndir);
  for (size_t k = 0; k < ndir; ++k) {
    double th = kPi * (k + 0.5) / ndir;
    dirs[k] = Vec2{std::cos(th), std::sin(th)};
  }
  ScanResult res;
  std::vector<double> sums(ndir);
  double leaf_w = std::pow(1.0 / double(mu.arity()), double(N));
  std::function<void(size_t, const TorusPoint&, const Mat2&)> dfs =
      [&](size_t depth, const TorusPoint& x, const Mat2& P) {
        if (depth == N) {
          for (size_t k = 0; k < ndir; ++k)
            sums[k] += leaf_w * std::log(P.apply(dirs[k]).norm());
          return;
        }
        for (uint32_t a = 0; a < mu.arity(); ++a)
          dfs(depth + 1, mu.atom(a).eval(x), mu.atom(a).deriv(x) * P);
      };
  for (size_t i = 0; i < grid; ++i)
    for (size_t j = 0; j < grid; ++j) {
      TorusPoint p((i + 0.5) / grid, (j + 0.5) / grid);
      std::fill(sums.begin(), sums.end(), 0.0);
      dfs(0, p, Mat2::identity());
      for (size_t k = 0; k < ndir; ++k) {
        double val = sums[k] / double(N);
        if (val < res.worst) {
          res.worst = val;
          res.worst_p = p;
          res.worst_v = dirs[k];
        }
      }
    }
  return res;
}

void c04_expansion() {
  DrivingMeasure mu = make_ab_system(0.0);
  Vec2 v{1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0)};
  double one = uef_value(mu, 1, TorusPoint(0.3, 0.7), v);
  bool ok_witness = std::abs(one - (-0.5 * std::log(2.0))) <= 1e-12;

  // inverse generators span the preimage cocycle of the same system
  std::vector<Diffeo> inv_atoms;
  inv_atoms.emplace_back(Mat2{1, -1, 0, 1}, std::vector<FourierMode>{}, "inv-x");
  inv_atoms.emplace_back(Mat2{1, 0, -1, 1}, std::vector<FourierMode>{}, "inv-y");
  DrivingMeasure mu_inv(std::move(inv_atoms), {0.5, 0.5});

  const size_t N = 12;
  ScanResult fwd = exact_scan(mu, N, 48, 64);
  ScanResult bwd = exact_scan(mu_inv, N, 48, 64);

  // Monte Carlo confirmation with a confidence interval at the worst pair,
  // doubled horizon
  Xoshiro256pp rng(derive_seed(kSeed, "uef-mc"));
  const size_t M = 4096, N2 = 24;
  double sum = 0.0, sumsq = 0.0;
  for (size_t s = 0; s < M; ++s) {
    Word w = mu.sample_word(N2, rng);
    CocycleTip t = cocycle_tip(mu, w, fwd.worst_p);
    double val = std::log(t.product.apply(fwd.worst_v).norm()) / double(N2);
    sum += val;
    sumsq += val * val;
  }
  double mean = sum / M;
  double se = std::sqrt((sumsq / M - mean * mean) / double(M - 1));
  double ci_lo = mean - 1.96 * se;

  verdict(4, "uniform expansion certificates",
          ok_witness && fwd.worst > 0.0 && bwd.worst > 0.0 && ci_lo > 0.0,
          fmt("witness %.15f, fwd worst %.4f, bwd worst %.4f, mc ci_lo %.4f", one,
              fwd.worst, bwd.worst, ci_lo));
}

// --- criterion 5: moment decay ----------------------------------------------
void c05_moments() {
  bool ok = true;
  std::string detail;
  for (double pert : {0.0, 0.01}) {
    DrivingMeasure mu = make_ab_system(pert);
    auto r = moment_decay(mu, 0.1, 12, 48, kSeed, 200);
    double markov = moment_markov_residual(mu, 0.1, 6, TorusPoint(0.21, 0.88),
                                           Vec2{0.6, 0.8});
    ok = ok && r.chi_hat_lo > 0.0 && markov < 1e-12;
    detail += fmt("pert %.2f: chi in [%.4f, %.4f], markov %.1e; ", pert, r.chi_hat_lo,
                  r.chi_hat_hi, markov);
  }
  verdict(5, "delta-moment exponential decay", ok, detail);
}

// --- criterion 6: angle power-law tails -------------------------------------
void c06_angles() {
  DrivingMeasure mu = make_ab_system(0.0);
  bool ok = true;
  std::string detail;
  for (auto mode : {AngleMode::kFixedDirection, AngleMode::kPulledBack}) {
    auto r = angle_tail(mu, 25, 100000, mode, kSeed, 200);
    ok = ok && r.beta1_lo > 0.0;
    detail += fmt("%s: beta1 %.3f ci [%.3f, %.3f]; ",
                  mode == AngleMode::kFixedDirection ? "fixed" : "pulled", r.beta1_hat,
                  r.beta1_lo, r.beta1_hi);
  }
  verdict(6, "angle tail power law", ok, detail);
}

// --- criterion 7: good-word fractions converge to one ------------------------
void c07_good_fractions() {
  DrivingMeasure mu = make_ab_system(0.0);
  Constants cst;
  cst.delta = 0.1;
  cst.chibar = 0.005;  // lambdabar = 0.05
  cst.eta = 0.4;       // transversality threshold 2 e^{-0.4 n}
  Curve c = make_circle(Vec2{0.5, 0.5}, 0.1, 1e-3);
  std::vector<size_t> ns{10, 15, 20, 25};
  std::vector<double> fr;
  std::string detail;
  for (size_t n : ns) {
    auto g = good_word_fraction(mu, c, n, cst, kSeed);
    fr.push_back(g.fraction);
    detail += fmt("n=%zu: %.3f%s ", n, g.fraction, g.exact ? "*" : "");
  }
  bool monotone = true;
  for (size_t i = 1; i < fr.size(); ++i) monotone = monotone && fr[i] >= fr[i - 1] - 0.02;
  bool ok = monotone && fr.back() > fr.front() && fr.back() >= 0.9;
  verdict(7, "good-word fraction approaches one", ok, detail);
}

// --- criterion 8: filtered pipeline mass retention ---------------------------
void c08_pipeline() {
  DrivingMeasure mu = make_ab_system(0.01);
  Constants cst;
  cst.p0 = 10;
  cst.eta = 0.25;
  cst.delta = 0.1;
  cst.chibar = 0.005;
  cst.c_retention = 0.2;
  // seed curve inside the invariant expanding cone
  Vec2 a{0.2, 0.2};
  Vec2 dir{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  Curve c = make_segment(a, a + dir * 0.1, 5e-3);
  PipelineOptions opt;
  opt.m = 4;
  opt.atom_cap = 64;
  opt.cover = 8;
  opt.cut_floor = 0.05;
  opt.seed = kSeed;
  auto r = filtered_pipeline(mu, make_admissible(c), cst, opt);
  double balance =
      std::abs(r.retained_mass + r.discarded_mass + r.dropped_mass - r.initial_mass);
  bool ok = balance <= 1e-12 &&
            r.retained_mass >= (1.0 - cst.c_retention) * r.initial_mass;
  std::string detail = fmt("retained %.4f, discarded %.4f, dropped %.2e, |bal| %.1e, good ",
                           r.retained_mass, r.discarded_mass, r.dropped_mass, balance);
  for (double g : r.stage_good_fraction) detail += fmt("%.3f ", g);
  verdict(8, "filtered pipeline retains mass", ok, detail);
}

// --- criterion 9: norm trace, smooth vs atomic -------------------------------
void c09_norm_trace() {
  DrivingMeasure mu = make_ab_system(0.0);
  auto ces = cesaro(mu, TorusPoint(0.29, 0.41), 512, 256, 64, 64, kSeed);
  auto tr = rho_norm_trace(ces.cloud, 0.1, 3, 4);
  double lo = 1e300, hi = 0.0;
  for (double v : tr.norm) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool bounded = hi / lo <= 2.0;

  PointCloudMeasure dirac;
  dirac.atoms.push_back({TorusPoint(0.5, 0.5), 1.0});
  auto trd = rho_norm_trace(dirac, 0.1, 3, 16);
  bool blowup = std::abs(trd.slope + 1.0) <= 0.1;
  verdict(9, "orbit-average norm trace bounded", bounded && blowup,
          fmt("smooth ratio %.3f (<=2), atom slope %.3f (-1 +/- 0.1)", hi / lo,
              trd.slope));
}

// --- criterion 10: equidistribution dichotomy --------------------------------
void c10_equidistribution() {
  DrivingMeasure mu = make_ab_system(0.0);
  auto gen = cesaro(mu, TorusPoint(0.3137515, 0.7182818), 4096, 16, 64, 64, kSeed);
  auto fix = cesaro(mu, TorusPoint(0.0, 0.0), 4096, 16, 64, 64, kSeed);
  bool ok = gen.tv_to_lebesgue.back() <= 0.2 && fix.tv_to_lebesgue.back() >= 0.9;
  verdict(10, "equidistribution dichotomy", ok,
          fmt("generic tv %.3f (<=0.2), fixed tv %.3f (>=0.9)",
              gen.tv_to_lebesgue.back(), fix.tv_to_lebesgue.back()));
}

// --- criterion 11: orbit dichotomy -------------------------------------------
void c11_orbits() {
  DrivingMeasure mu = make_ab_system(0.0);
  auto zero = orbit_classify(mu, TorusPoint(0.0, 0.0));
  auto third = orbit_classify(mu, TorusPoint(1.0 / 3.0, 1.0 / 3.0));
  OrbitOptions opt;
  opt.depth = 20;
  opt.eps = 0.05;
  auto gen = orbit_classify(mu, TorusPoint(0.3137515, 0.7182818), opt);
  bool ok = zero.exact && zero.orbit_size == 1 && third.exact &&
            third.orbit_size <= 9 && gen.kind == OrbitKind::kDense;
  verdict(11, "orbit closure dichotomy", ok,
          fmt("origin %zu, third %zu (<=9), generic %s (%zu pts)", zero.orbit_size,
              third.orbit_size, gen.kind == OrbitKind::kDense ? "dense" : "not dense",
              gen.orbit_size));
}

// --- criterion 12: combinatorial tail bounds ----------------------------------
void c12_tails() {
  size_t violations = 0, checks = 0;
  for (size_t n = 5; n <= 60; ++n)
    for (double eta : {0.05, 0.1, 0.2, 0.3}) {
      auto tc = binom_tail_check(n, eta, 1.0);
      checks += 2;
      if (!tc.head_ok) ++violations;
      if (!tc.weighted_ok) ++violations;
    }
  verdict(12, "binomial tail bounds", violations == 0,
          fmt("%zu checks, %zu violations", checks, violations));
}

// --- criterion 13: determinism and basic identities ---------------------------
void c13_reproducibility() {
  DrivingMeasure mu = make_ab_system(0.01);
  auto r1 = moment_decay(mu, 0.1, 8, 16, 77, 50);
  auto r2 = moment_decay(mu, 0.1, 8, 16, 77, 50);
  uint64_t h1 = fnv1a64(r1.sup_moment.data(), r1.sup_moment.size() * sizeof(double));
  uint64_t h2 = fnv1a64(r2.sup_moment.data(), r2.sup_moment.size() * sizeof(double));
  bool bytes_equal = h1 == h2 && r1.chi_hat == r2.chi_hat;

  auto a1 = angle_tail(mu, 12, 5000, AngleMode::kFixedDirection, 77, 50);
  auto a2 = angle_tail(mu, 12, 5000, AngleMode::kFixedDirection, 77, 50);
  bytes_equal = bytes_equal && a1.beta1_hat == a2.beta1_hat;

  Constants cst;
  bool identities = std::abs(cst.C2() - std::log(4.0 * std::exp(1.0) / 3.0)) == 0.0;
  auto words = mu.enumerate_words(8);
  double tot = 0.0;
  for (const auto& w : words) tot += w.weight;
  identities = identities && std::abs(tot - 1.0) < 1e-15 && words.size() == 256;

  verdict(13, "byte-level reproducibility", bytes_equal && identities,
          fmt("hash %016llx %s, weight sum err %.1e", (unsigned long long)h1,
              bytes_equal ? "stable" : "unstable", std::abs(tot - 1.0)));
}

}  // namespace

int main() {
  c01_norm_analytics();
  c02_variable_radius();
  c03_curvature();
  c04_expansion();
  c05_moments();
  c06_angles();
  c07_good_fractions();
  c08_pipeline();
  c09_norm_trace();
  c10_equidistribution();
  c11_orbits();
  c12_tails();
  c13_reproducibility();
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
