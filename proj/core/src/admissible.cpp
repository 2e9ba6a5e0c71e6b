#include "rdslab/admissible.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "rdslab/cocycle.hpp"

namespace rdslab {

double AdmissibleMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.mass;
  return s;
}

double AdmissibleMeasure::max_abs_curvature() const {
  double m = 0.0;
  for (const auto& a : atoms) m = std::max(m, a.curve.max_abs_curvature());
  return m;
}

double AdmissibleMeasure::max_density_log_lipschitz() const {
  double m = 0.0;
  for (const auto& a : atoms) m = std::max(m, density_log_lipschitz(a.curve));
  return m;
}

double AdmissibleMeasure::min_length() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& a : atoms) m = std::min(m, a.curve.length());
  return m;
}

AdmissibleMeasure make_admissible(const Curve& c, double mass) {
  if (mass <= 0.0) throw std::invalid_argument("mass must be positive");
  return AdmissibleMeasure{{CurveMeasureAtom{c, mass}}};
}

AdmissibleMeasure push_admissible(const Diffeo& f, const AdmissibleMeasure& m) {
  AdmissibleMeasure out;
  out.atoms.reserve(m.atoms.size());
  for (const auto& a : m.atoms)
    out.atoms.push_back({push_curve(f, a.curve), a.mass});
  return out;
}

AdmissibleMeasure push_admissible(const DrivingMeasure& mu, const Word& w,
                                  const AdmissibleMeasure& m) {
  AdmissibleMeasure out;
  out.atoms.reserve(m.atoms.size());
  for (const auto& a : m.atoms)
    out.atoms.push_back({push_curve(mu, w, a.curve), a.mass});
  return out;
}

namespace {

// density-weighted length of every chord segment
std::vector<double> segment_weights(const Curve& c) {
  std::vector<double> w(c.size() - 1);
  for (size_t i = 0; i + 1 < c.size(); ++i) {
    double chord = (c.node(i + 1).pos - c.node(i).pos).norm();
    double logd = 0.5 * (c.node(i).log_density + c.node(i + 1).log_density);
    w[i] = chord * std::exp(logd);
  }
  return w;
}

double weighted_length(const Curve& c) {
  double s = 0.0;
  for (double x : segment_weights(c)) s += x;
  return s;
}

}  // namespace

AdmissibleMeasure cut_admissible(const AdmissibleMeasure& m, double a) {
  AdmissibleMeasure out;
  for (const auto& atom : m.atoms) {
    auto pieces = cut_pieces(atom.curve, a);
    if (pieces.size() == 1) {
      out.atoms.push_back(atom);
      continue;
    }
    std::vector<double> w(pieces.size());
    double tot = 0.0;
    for (size_t i = 0; i < pieces.size(); ++i) tot += (w[i] = weighted_length(pieces[i]));
    double assigned = 0.0;
    for (size_t i = 0; i < pieces.size(); ++i) {
      // make piece masses sum to the atom mass exactly
      double mi = (i + 1 == pieces.size()) ? atom.mass - assigned
                                           : atom.mass * (w[i] / tot);
      assigned += mi;
      out.atoms.push_back({std::move(pieces[i]), mi});
    }
  }
  return out;
}

PointCloudMeasure project(const AdmissibleMeasure& m) {
  PointCloudMeasure cloud;
  for (const auto& atom : m.atoms) {
    auto w = segment_weights(atom.curve);
    double tot = 0.0;
    for (double x : w) tot += x;
    if (tot <= 0.0) continue;
    double assigned = 0.0;
    for (size_t i = 0; i < w.size(); ++i) {
      Vec2 mid = (atom.curve.node(i).pos + atom.curve.node(i + 1).pos) * 0.5;
      double wi = (i + 1 == w.size()) ? atom.mass - assigned
                                      : atom.mass * (w[i] / tot);
      assigned += wi;
      cloud.atoms.push_back({wrap(mid), wi});
    }
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// good words

GoodWordReport good_word(const DrivingMeasure& mu, const Word& w, const Curve& c,
                         const Constants& cst, size_t cover) {
  size_t n = w.size();
  GoodWordReport rep;
  double exp_thr = 2.0 * std::exp(cst.lambdabar() * double(n));
  double ang_thr = 2.0 * std::exp(-cst.eta * double(n));

  size_t nc = std::min(cover, c.size());
  rep.expansion_margin = std::numeric_limits<double>::infinity();
  rep.angle_margin = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < nc; ++k) {
    size_t i = (nc == 1) ? 0 : k * (c.size() - 1) / (nc - 1);
    CocycleTip tip = cocycle_tip(mu, w, c.point(i));
    double ex = tip.product.apply(c.node(i).tangent).norm();
    rep.expansion_margin = std::min(rep.expansion_margin, ex / exp_thr);
    SingularData sd = singular_data(tip.product);
    if (!sd.defined) {
      rep.angle_margin = 0.0;
    } else {
      double ang = proj_angle(ProjectiveDirection(c.node(i).tangent), sd.e_s);
      rep.angle_margin = std::min(rep.angle_margin, ang / ang_thr);
    }
  }
  rep.expansion_ok = rep.expansion_margin >= 1.0;
  rep.angle_ok = rep.angle_margin >= 1.0;

  // word-only Jacobian range on a fixed point grid
  double jac_bound = cst.C0 + 2.0 * double(n) * cst.eps0;
  rep.jac_ok = true;
  for (size_t i = 0; i < 8 && rep.jac_ok; ++i) {
    for (size_t j = 0; j < 8; ++j) {
      CocycleTip t = cocycle_tip(mu, w, TorusPoint((i + 0.5) / 8.0, (j + 0.5) / 8.0));
      if (std::abs(t.log_jac) >= jac_bound) {
        rep.jac_ok = false;
        break;
      }
    }
  }
  rep.good = rep.expansion_ok && rep.angle_ok && rep.jac_ok;
  return rep;
}

GoodFraction good_word_fraction(const DrivingMeasure& mu, const Curve& c, size_t n,
                                const Constants& cst, uint64_t seed, size_t enum_cap,
                                size_t mc_words) {
  GoodFraction gf;
  if (std::pow(double(mu.arity()), double(n)) <= double(enum_cap)) {
    gf.exact = true;
    for (const auto& ww : mu.enumerate_words(n, enum_cap)) {
      ++gf.words;
      if (good_word(mu, ww.word, c, cst).good) gf.fraction += ww.weight;
    }
  } else {
    Xoshiro256pp rng(derive_seed(seed, "good-frac"));
    size_t good = 0;
    for (size_t s = 0; s < mc_words; ++s) {
      if (good_word(mu, mu.sample_word(n, rng), c, cst).good) ++good;
    }
    gf.words = mc_words;
    gf.fraction = double(good) / double(mc_words);
  }
  return gf;
}

std::vector<std::vector<bool>> stage_patterns(size_t m, double eta) {
  std::vector<std::vector<bool>> out;
  std::vector<bool> cur;
  auto rec = [&](auto&& self, size_t k, size_t bad) -> void {
    if (k == m) {
      out.push_back(cur);
      return;
    }
    for (bool b : {false, true}) {
      if (b && double(bad + 1) > double(k + 1) * eta + 1e-12) continue;
      cur.push_back(b);
      self(self, k + 1, bad + (b ? 1 : 0));
      cur.pop_back();
    }
  };
  rec(rec, 0, 0);
  return out;
}

double stage_cut_length(const Constants& cst, size_t k, double extra_log) {
  double p0 = double(cst.p0);
  double lg = -std::log(4.0 * cst.Kpp()) - 7.0 * p0 * cst.C0p -
              (11.0 * p0 * double(k) * cst.C0p * cst.eta + extra_log + p0 * cst.C0p);
  return std::exp(lg);
}

// ---------------------------------------------------------------------------
// pipeline

namespace {

struct Branch {
  AdmissibleMeasure measure;
  size_t bad_count = 0;
};

// deterministic systematic mass-proportional resampling to at most cap atoms
AdmissibleMeasure resample(const AdmissibleMeasure& m, size_t cap) {
  double total = m.total_mass();
  size_t n = m.atoms.size();
  std::vector<double> cum(n);
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) cum[i] = (acc += m.atoms[i].mass);
  AdmissibleMeasure out;
  out.atoms.reserve(cap);
  double step = total / double(cap);
  size_t idx = 0;
  std::vector<size_t> counts(n, 0);
  for (size_t k = 0; k < cap; ++k) {
    double u = (double(k) + 0.5) * step;
    while (idx + 1 < n && cum[idx] < u) ++idx;
    ++counts[idx];
  }
  double assigned = 0.0;
  size_t last = 0;
  for (size_t i = 0; i < n; ++i)
    if (counts[i] > 0) last = i;
  for (size_t i = 0; i < n; ++i) {
    if (counts[i] == 0) continue;
    double mi = (i == last) ? total - assigned : double(counts[i]) * step;
    assigned += mi;
    out.atoms.push_back({m.atoms[i].curve, mi});
  }
  return out;
}

}  // namespace

PipelineResult filtered_pipeline(const DrivingMeasure& mu, const AdmissibleMeasure& nu,
                                 const Constants& cst, const PipelineOptions& opt) {
  size_t p0 = size_t(cst.p0);
  if (std::pow(double(mu.arity()), double(p0)) > 4096.0)
    throw std::invalid_argument("stage word enumeration exceeds the 4096 cap");

  PipelineResult res;
  res.initial_mass = nu.total_mass();
  res.stage_good_fraction.assign(opt.m, 0.0);
  std::vector<double> stage_mass(opt.m, 0.0);

  // warm-up convolution with d unfiltered letters
  std::vector<Branch> branches;
  {
    Branch b0;
    if (opt.d == 0) {
      b0.measure = nu;
    } else {
      for (const auto& ww : mu.enumerate_words(opt.d, 4096)) {
        AdmissibleMeasure pushed = push_admissible(mu, ww.word, nu);
        for (auto& a : pushed.atoms) {
          a.mass *= ww.weight;
          b0.measure.atoms.push_back(std::move(a));
        }
      }
      if (b0.measure.atoms.size() > opt.atom_cap) {
        res.ledger.push_back({0, "resampled", b0.measure.total_mass()});
        b0.measure = resample(b0.measure, opt.atom_cap);
      }
    }
    branches.push_back(std::move(b0));
  }

  auto words = mu.enumerate_words(p0, 4096);

  // word-only Jacobian range test, shared by every stage and branch
  std::vector<char> word_jac_ok(words.size(), 1);
  {
    double jac_bound = cst.C0 + 2.0 * double(p0) * cst.eps0;
    for (size_t wi = 0; wi < words.size(); ++wi) {
      bool ok = true;
      for (size_t i = 0; i < 8 && ok; ++i)
        for (size_t j = 0; j < 8; ++j) {
          CocycleTip t = cocycle_tip(mu, words[wi].word,
                                     TorusPoint((i + 0.5) / 8.0, (j + 0.5) / 8.0));
          if (std::abs(t.log_jac) >= jac_bound) {
            ok = false;
            break;
          }
        }
      word_jac_ok[wi] = ok ? 1 : 0;
    }
  }

  struct Pair {
    size_t atom, word;
    double mass;
  };

  for (size_t stage = 1; stage <= opt.m; ++stage) {
    double cut = opt.cut_floor > 0.0
                     ? opt.cut_floor
                     : opt.cut_scale * stage_cut_length(cst, stage);
    std::vector<Branch> next;
    double discarded = 0.0, dropped = 0.0, resampled = 0.0;
    for (auto& br : branches) {
      if (br.measure.atoms.size() > opt.atom_cap) {
        resampled += br.measure.total_mass();
        br.measure = resample(br.measure, opt.atom_cap);
      }
      // classify every (atom, word) pair by mass only; pushing happens later
      // and only for pairs that survive the pattern filter and the selection
      double branch_mass = br.measure.total_mass();
      std::vector<Pair> cls[2];  // [0] good, [1] bad
      double cls_mass[2] = {0.0, 0.0};
      for (size_t ai = 0; ai < br.measure.atoms.size(); ++ai) {
        const auto& atom = br.measure.atoms[ai];
        for (size_t wi = 0; wi < words.size(); ++wi) {
          GoodWordReport rep =
              good_word(mu, words[wi].word, atom.curve, cst, opt.cover);
          bool is_good = rep.expansion_ok && rep.angle_ok && word_jac_ok[wi];
          double mass = atom.mass * words[wi].weight;
          cls[is_good ? 0 : 1].push_back({ai, wi, mass});
          cls_mass[is_good ? 0 : 1] += mass;
        }
      }
      res.stage_good_fraction[stage - 1] += cls_mass[0];
      stage_mass[stage - 1] += branch_mass;

      for (int ci = 0; ci < 2; ++ci) {
        bool bad = ci == 1;
        if (cls[ci].empty() || cls_mass[ci] <= 0.0) continue;
        size_t nb = br.bad_count + (bad ? 1 : 0);
        if (double(nb) > double(stage) * cst.eta + 1e-12) {
          discarded += cls_mass[ci];
          continue;
        }
        // systematic mass-proportional selection of pairs to push
        std::vector<std::pair<size_t, double>> picks;  // pair index, mass
        if (cls[ci].size() <= opt.atom_cap) {
          for (size_t i = 0; i < cls[ci].size(); ++i)
            picks.emplace_back(i, cls[ci][i].mass);
        } else {
          resampled += cls_mass[ci];
          double step = cls_mass[ci] / double(opt.atom_cap);
          std::vector<size_t> counts(cls[ci].size(), 0);
          double acc = 0.0;
          size_t idx = 0;
          for (size_t k = 0; k < opt.atom_cap; ++k) {
            double u = (double(k) + 0.5) * step;
            while (idx + 1 < cls[ci].size() && acc + cls[ci][idx].mass < u)
              acc += cls[ci][idx++].mass;
            ++counts[idx];
          }
          size_t last = 0;
          for (size_t i = 0; i < counts.size(); ++i)
            if (counts[i] > 0) last = i;
          double assigned = 0.0;
          for (size_t i = 0; i < counts.size(); ++i) {
            if (counts[i] == 0) continue;
            double mi = (i == last) ? cls_mass[ci] - assigned
                                    : double(counts[i]) * step;
            assigned += mi;
            picks.emplace_back(i, mi);
          }
        }
        Branch nbr;
        nbr.bad_count = nb;
        for (auto& [pi, mass] : picks) {
          if (mass < opt.mass_floor) {
            dropped += mass;
            continue;
          }
          const Pair& pr = cls[ci][pi];
          Curve pushed =
              push_curve(mu, words[pr.word].word, br.measure.atoms[pr.atom].curve);
          AdmissibleMeasure one{{CurveMeasureAtom{std::move(pushed), mass}}};
          for (auto& piece : cut_admissible(one, cut).atoms)
            nbr.measure.atoms.push_back(std::move(piece));
        }
        if (!nbr.measure.atoms.empty()) next.push_back(std::move(nbr));
      }
    }
    if (discarded > 0.0) res.ledger.push_back({stage, "discarded", discarded});
    if (dropped > 0.0) res.ledger.push_back({stage, "dropped", dropped});
    if (resampled > 0.0) res.ledger.push_back({stage, "resampled", resampled});
    res.discarded_mass += discarded;
    res.dropped_mass += dropped;
    branches = std::move(next);
  }

  for (size_t s = 0; s < opt.m; ++s)
    if (stage_mass[s] > 0.0) res.stage_good_fraction[s] /= stage_mass[s];

  for (auto& br : branches)
    for (auto& a : br.measure.atoms)
      res.final_measure.atoms.push_back(std::move(a));
  res.retained_mass = res.final_measure.total_mass();
  res.ledger.push_back({opt.m, "retained", res.retained_mass});
  return res;
}

// ---------------------------------------------------------------------------
// binomial tails

TailCheck binom_tail_check(size_t n, double eta, double a, double Cpp4) {
  if (n == 0 || eta <= 0.0 || eta >= 1.0 || a <= 0.0)
    throw std::invalid_argument("binom_tail_check needs n>0, eta in (0,1), a>0");
  // exact binomial row via Pascal recurrence in double (n <= ~1000 is fine)
  std::vector<double> c(n + 1, 0.0);
  c[0] = 1.0;
  for (size_t i = 1; i <= n; ++i)
    for (size_t k = i; k >= 1; --k) c[k] += c[k - 1];

  double h = eta * std::log(eta) + (1.0 - eta) * std::log(1.0 - eta);
  size_t cut = size_t(double(n) * eta);
  TailCheck tc;
  for (size_t k = 0; k <= cut && k <= n; ++k) tc.head_sum += c[k];
  tc.head_bound = Cpp4 * double(n) * eta * std::exp(-double(n) * h);
  tc.head_ok = tc.head_sum <= tc.head_bound;

  double b = a - h / eta;  // h < 0, so b > a
  for (size_t k = cut + 1; k <= n; ++k)
    tc.weighted_sum += c[k] * std::exp(-b * double(k));
  tc.weighted_bound = Cpp4 * std::exp(-a * double(n) * eta) / (1.0 - std::exp(-a));
  tc.weighted_ok = tc.weighted_sum <= tc.weighted_bound;
  return tc;
}

}  // namespace rdslab
