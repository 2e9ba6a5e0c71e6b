#include "rdslab/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rdslab {

SingularData singular_data(const Mat2& product) {
  Svd2 s = svd2(product);
  SingularData d;
  d.lambda_u = s.su;
  d.lambda_s = s.ss;
  d.e_u = ProjectiveDirection(s.u_in);
  d.e_s = ProjectiveDirection(s.s_in);
  d.defined = s.defined;
  return d;
}

SingularData singular_data(const DrivingMeasure& mu, const Word& w,
                           const TorusPoint& p) {
  return singular_data(cocycle_tip(mu, w, p).product);
}

std::optional<ProjectiveDirection> pulled_unstable(const DrivingMeasure& mu,
                                                   const Word& w,
                                                   const TorusPoint& x) {
  TorusPoint pre = word_preimage(mu, w, x);
  CocycleTip tip = cocycle_tip(mu, w, pre);
  SingularData sd = singular_data(tip.product);
  if (!sd.defined) return std::nullopt;
  return ProjectiveDirection(tip.product.apply(sd.e_u.v));
}

// ---------------------------------------------------------------------------
// expansion certificates

namespace {

// E_w[ ln |A_w v| ] over all words of length N, exact enumeration, for
// sign = +1 forward and sign = -1 inverse-cocycle expansion.
double exact_log_expansion(const DrivingMeasure& mu, size_t N, const TorusPoint& p,
                           const Vec2& v, int sign) {
  auto words = mu.enumerate_words(N, 1u << 26);
  double acc = 0.0;
  for (const auto& ww : words) {
    double g;
    if (sign > 0) {
      CocycleTip t = cocycle_tip(mu, ww.word, p);
      g = std::log(t.product.apply(v).norm());
    } else {
      // expansion of preimages: |(Df^N(f^{-N} x))^{-1} v| at x = p
      TorusPoint pre = word_preimage(mu, ww.word, p);
      CocycleTip t = cocycle_tip(mu, ww.word, pre);
      g = std::log(t.product.inverse().apply(v).norm());
    }
    acc += ww.weight * g;
  }
  return acc / double(N);
}

ExpansionReport scan_expansion(const DrivingMeasure& mu, size_t N, size_t nx,
                               size_t ny, size_t ndir, int sign) {
  if (N == 0 || nx == 0 || ny == 0 || ndir == 0)
    throw std::invalid_argument("expansion scan needs positive sizes");
  ExpansionReport rep;
  rep.worst = std::numeric_limits<double>::infinity();
  constexpr double kPi = 3.14159265358979323846;
  for (size_t i = 0; i < nx; ++i) {
    for (size_t j = 0; j < ny; ++j) {
      TorusPoint p((i + 0.5) / nx, (j + 0.5) / ny);
      for (size_t k = 0; k < ndir; ++k) {
        double th = kPi * (k + 0.5) / ndir;  // projective: half turn suffices
        Vec2 v{std::cos(th), std::sin(th)};
        double val = exact_log_expansion(mu, N, p, v, sign);
        ++rep.pairs_checked;
        if (val < rep.worst) {
          rep.worst = val;
          rep.worst_point = p;
          rep.worst_dir = ProjectiveDirection(v);
        }
      }
    }
  }
  rep.positive = rep.worst > 0.0;
  return rep;
}

}  // namespace

double uef_value(const DrivingMeasure& mu, size_t N, const TorusPoint& p,
                 const Vec2& v) {
  return exact_log_expansion(mu, N, p, v, +1);
}

double uep_value(const DrivingMeasure& mu, size_t N, const TorusPoint& p,
                 const Vec2& v) {
  return exact_log_expansion(mu, N, p, v, -1);
}

ExpansionReport certify_uef(const DrivingMeasure& mu, size_t N, size_t nx, size_t ny,
                            size_t ndir) {
  return scan_expansion(mu, N, nx, ny, ndir, +1);
}

ExpansionReport certify_uep(const DrivingMeasure& mu, size_t N, size_t nx, size_t ny,
                            size_t ndir) {
  return scan_expansion(mu, N, nx, ny, ndir, -1);
}

// ---------------------------------------------------------------------------
// moment decay

namespace {

struct PairSample {
  TorusPoint p;
  Vec2 v;
};

std::vector<PairSample> sample_pairs(size_t n_pairs, uint64_t seed) {
  Xoshiro256pp rng(derive_seed(seed, "moment-pairs"));
  std::vector<PairSample> pairs(n_pairs);
  constexpr double kPi = 3.14159265358979323846;
  for (auto& ps : pairs) {
    ps.p = TorusPoint(rng.next_double(), rng.next_double());
    double th = kPi * rng.next_double();
    ps.v = Vec2{std::cos(th), std::sin(th)};
  }
  return pairs;
}

// least-squares slope of y against n for n = 1..y.size()
double ls_slope(const std::vector<double>& y) {
  size_t m = y.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < m; ++i) {
    double x = double(i + 1);
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

MomentDecayResult moment_decay(const DrivingMeasure& mu, double delta, size_t n_max,
                               size_t n_pairs, uint64_t seed, size_t n_boot) {
  if (delta <= 0.0 || n_max == 0 || n_pairs == 0)
    throw std::invalid_argument("moment_decay needs positive delta, n_max, pairs");
  auto pairs = sample_pairs(n_pairs, seed);

  // per-pair moment at every horizon, then sup across pairs
  // moments[pair][n-1] = E_w |Df^n(p) v|^{-delta}, exact when affordable
  std::vector<std::vector<double>> moments(n_pairs, std::vector<double>(n_max, 0.0));
  bool exact = std::pow(double(mu.arity()), double(n_max)) <= 4096.0;
  Xoshiro256pp wrng(derive_seed(seed, "moment-words"));
  const size_t mc_words = 4096;
  for (size_t ip = 0; ip < n_pairs; ++ip) {
    auto accumulate = [&](const Word& w, double weight) {
      TorusPoint x = pairs[ip].p;
      Vec2 u = pairs[ip].v;
      for (size_t k = 0; k < n_max; ++k) {
        const Diffeo& f = mu.atom(w.indices[k]);
        u = f.deriv(x).apply(u);
        x = f.eval(x);
        moments[ip][k] += weight * std::pow(u.norm(), -delta);
      }
    };
    if (exact) {
      for (const auto& ww : mu.enumerate_words(n_max, 4096))
        accumulate(ww.word, ww.weight);
    } else {
      for (size_t s = 0; s < mc_words; ++s)
        accumulate(mu.sample_word(n_max, wrng), 1.0 / double(mc_words));
    }
  }

  MomentDecayResult res;
  res.sup_moment.assign(n_max, 0.0);
  for (size_t k = 0; k < n_max; ++k)
    for (size_t ip = 0; ip < n_pairs; ++ip)
      res.sup_moment[k] = std::max(res.sup_moment[k], moments[ip][k]);

  auto rate_of = [&](const std::vector<size_t>& idx) {
    std::vector<double> y(n_max);
    for (size_t k = 0; k < n_max; ++k) {
      double sup = 0.0;
      for (size_t ip : idx) sup = std::max(sup, moments[ip][k]);
      y[k] = -std::log(std::max(sup, 1e-300));
    }
    return ls_slope(y);
  };

  std::vector<size_t> all(n_pairs);
  std::iota(all.begin(), all.end(), 0);
  res.chi_hat = rate_of(all);

  Xoshiro256pp brng(derive_seed(seed, "moment-boot"));
  std::vector<double> boots(n_boot);
  std::vector<size_t> idx(n_pairs);
  for (size_t b = 0; b < n_boot; ++b) {
    for (auto& i : idx) i = brng.next_below(n_pairs);
    boots[b] = rate_of(idx);
  }
  std::sort(boots.begin(), boots.end());
  res.chi_hat_lo = boots[size_t(0.025 * (n_boot - 1))];
  res.chi_hat_hi = boots[size_t(0.975 * (n_boot - 1))];
  return res;
}

double moment_markov_residual(const DrivingMeasure& mu, double delta, size_t n,
                              const TorusPoint& p, const Vec2& v) {
  // direct horizon-(n+1) expectation
  double direct = 0.0;
  for (const auto& ww : mu.enumerate_words(n + 1, 1u << 22)) {
    CocycleTip t = cocycle_tip(mu, ww.word, p);
    direct += ww.weight * std::pow(t.product.apply(v).norm(), -delta);
  }
  // conditioned on the first letter: E_f [ m_n( f(p), Df(p)v / |..| ) |Df(p)v|^{-delta} ]
  double chained = 0.0;
  for (size_t a = 0; a < mu.arity(); ++a) {
    const Diffeo& f = mu.atom(a);
    Vec2 u = f.deriv(p).apply(v);
    TorusPoint q = f.eval(p);
    double inner = 0.0;
    for (const auto& ww : mu.enumerate_words(n, 1u << 22)) {
      CocycleTip t = cocycle_tip(mu, ww.word, q);
      inner += ww.weight * std::pow(t.product.apply(u.normalized()).norm(), -delta);
    }
    chained += mu.probs()[a] * inner * std::pow(u.norm(), -delta);
  }
  return std::abs(direct - chained);
}

// ---------------------------------------------------------------------------
// angle tails

AngleTailResult angle_tail(const DrivingMeasure& mu, size_t n, size_t samples,
                           AngleMode mode, uint64_t seed, size_t n_boot) {
  if (n == 0 || samples == 0)
    throw std::invalid_argument("angle_tail needs positive n, samples");
  Xoshiro256pp rng(derive_seed(seed, "angle-tail"));
  constexpr double kPi = 3.14159265358979323846;

  AngleTailResult res;
  // base point and reference direction are fixed across samples; only the
  // word is random.  The reference is drawn from the support of the sampled
  // direction distribution (one fresh word), so the tail near zero probes the
  // regularity of that distribution rather than the geometry of an arbitrary
  // line.
  TorusPoint p(rng.next_double(), rng.next_double());
  ProjectiveDirection v;
  {
    Word w0 = mu.sample_word(n, rng);
    if (mode == AngleMode::kFixedDirection) {
      SingularData sd0 = singular_data(mu, w0, p);
      if (!sd0.defined)
        throw std::runtime_error("angle_tail: reference stable direction undefined");
      v = sd0.e_s;
    } else {
      auto vu0 = pulled_unstable(mu, w0, p);
      if (!vu0)
        throw std::runtime_error("angle_tail: reference pulled direction undefined");
      v = *vu0;
    }
  }
  std::vector<double> angles;
  angles.reserve(samples);
  for (size_t s = 0; s < samples; ++s) {
    Word w = mu.sample_word(n, rng);
    double ang;
    if (mode == AngleMode::kFixedDirection) {
      SingularData sd = singular_data(mu, w, p);
      if (!sd.defined) {
        ++res.undefined;
        continue;
      }
      ang = proj_angle(v, sd.e_s);
    } else {
      auto vu = pulled_unstable(mu, w, p);
      if (!vu) {
        ++res.undefined;
        continue;
      }
      ang = proj_angle(v, *vu);
    }
    angles.push_back(ang);
  }
  res.samples = angles.size();
  if (angles.empty()) return res;

  // dyadic thresholds halving from pi/8 down; fit ln(tail) against ln(thr)
  std::vector<double> thr;
  for (double t = kPi / 8.0; t > 1e-6; t *= 0.5) thr.push_back(t);
  res.thresholds = thr;
  res.tail_prob.resize(thr.size());

  auto fit = [&](const std::vector<double>& a, std::vector<double>* probs_out) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t m = 0;
    for (size_t i = 0; i < thr.size(); ++i) {
      size_t cnt = 0;
      for (double ang : a)
        if (ang < thr[i]) ++cnt;
      double pr = double(cnt) / double(a.size());
      if (probs_out) (*probs_out)[i] = pr;
      if (cnt < 5) continue;  // tail too thin to weigh in the fit
      double x = std::log(thr[i]);
      double y = std::log(pr);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    if (m < 2) return 0.0;
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  };

  res.beta1_hat = fit(angles, &res.tail_prob);

  Xoshiro256pp brng(derive_seed(seed, "angle-boot"));
  std::vector<double> boots(n_boot);
  std::vector<double> resampled(angles.size());
  for (size_t b = 0; b < n_boot; ++b) {
    for (auto& x : resampled) x = angles[brng.next_below(angles.size())];
    boots[b] = fit(resampled, nullptr);
  }
  std::sort(boots.begin(), boots.end());
  res.beta1_lo = boots[size_t(0.025 * (n_boot - 1))];
  res.beta1_hi = boots[size_t(0.975 * (n_boot - 1))];
  return res;
}

double jac_range_freq(const DrivingMeasure& mu, size_t n, double C0, double eps0,
                      size_t nx, size_t ny, size_t samples, uint64_t seed) {
  Xoshiro256pp rng(derive_seed(seed, "jac-range"));
  double bound = C0 + 2.0 * double(n) * eps0;
  size_t pass = 0;
  for (size_t s = 0; s < samples; ++s) {
    Word w = mu.sample_word(n, rng);
    bool ok = true;
    for (size_t i = 0; i < nx && ok; ++i) {
      for (size_t j = 0; j < ny && ok; ++j) {
        TorusPoint p((i + 0.5) / nx, (j + 0.5) / ny);
        CocycleTip t = cocycle_tip(mu, w, p);
        if (std::abs(t.log_jac) >= bound) ok = false;
      }
    }
    if (ok) ++pass;
  }
  return double(pass) / double(samples);
}

}  // namespace rdslab
