#include "rdslab/curves.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rdslab {

Curve::Curve(std::vector<CurveNode> nodes, double h_max)
    : nodes_(std::move(nodes)), h_max_(h_max) {
  if (nodes_.size() < 2) throw std::invalid_argument("curve needs >= 2 nodes");
  if (h_max_ <= 0.0) throw std::invalid_argument("h_max must be positive");
  for (size_t i = 1; i < nodes_.size(); ++i) {
    if ((nodes_[i].pos - nodes_[i - 1].pos).norm() >= 0.5)
      throw std::invalid_argument("curve lift has a jump >= 1/2; not a valid chain");
  }
}

double Curve::length() const { return arclength_at(nodes_.size() - 1); }

double Curve::arclength_at(size_t i) const {
  double s = 0.0;
  for (size_t k = 1; k <= i; ++k) s += (nodes_[k].pos - nodes_[k - 1].pos).norm();
  return s;
}

double Curve::max_abs_curvature() const {
  double m = 0.0;
  for (const auto& n : nodes_) m = std::max(m, std::abs(n.curvature));
  return m;
}

double Curve::max_spacing() const {
  double m = 0.0;
  for (size_t i = 1; i < nodes_.size(); ++i)
    m = std::max(m, (nodes_[i].pos - nodes_[i - 1].pos).norm());
  return m;
}

namespace {

// midpoint of the local quadratic arc model between two nodes
CurveNode arc_midpoint(const CurveNode& a, const CurveNode& b) {
  CurveNode m;
  Vec2 d = b.pos - a.pos;
  double L = d.norm();
  Vec2 tm = a.tangent + b.tangent;
  double tn = tm.norm();
  m.tangent = tn > 1e-12 ? tm * (1.0 / tn) : d * (1.0 / L);
  m.curvature = 0.5 * (a.curvature + b.curvature);
  // sagitta of the circular arc through the chord: k L^2 / 8. The left
  // normal points toward the center for positive curvature, so the arc
  // midpoint sits on the opposite side of the chord.
  Vec2 normal{-m.tangent.y, m.tangent.x};
  m.pos = (a.pos + b.pos) * 0.5 - normal * (m.curvature * L * L / 8.0);
  m.log_density = 0.5 * (a.log_density + b.log_density);
  return m;
}

CurveNode lerp_node(const CurveNode& a, const CurveNode& b, double u) {
  CurveNode m;
  m.pos = a.pos * (1.0 - u) + b.pos * u;
  Vec2 t = a.tangent * (1.0 - u) + b.tangent * u;
  double tn = t.norm();
  m.tangent = tn > 1e-12 ? t * (1.0 / tn) : a.tangent;
  m.curvature = (1.0 - u) * a.curvature + u * b.curvature;
  m.log_density = (1.0 - u) * a.log_density + u * b.log_density;
  return m;
}

}  // namespace

void Curve::refine_to(double h) {
  if (h <= 0.0) throw std::invalid_argument("refine_to needs h > 0");
  std::vector<CurveNode> out;
  out.reserve(nodes_.size());
  out.push_back(nodes_.front());
  for (size_t i = 1; i < nodes_.size(); ++i) {
    // depth-first split of the segment until chords fit
    std::vector<CurveNode> stack{nodes_[i]};
    while (!stack.empty()) {
      const CurveNode& left = out.back();
      CurveNode right = stack.back();
      if ((right.pos - left.pos).norm() <= h) {
        out.push_back(right);
        stack.pop_back();
      } else {
        stack.push_back(arc_midpoint(left, right));
        if (stack.size() > 64)
          throw std::runtime_error("curve refinement failed to converge");
      }
    }
  }
  nodes_ = std::move(out);
}

Curve Curve::subcurve(double s0, double s1) const {
  double total = length();
  s0 = std::clamp(s0, 0.0, total);
  s1 = std::clamp(s1, 0.0, total);
  if (s1 - s0 <= 0.0) throw std::invalid_argument("subcurve needs s0 < s1");
  std::vector<CurveNode> out;
  double s = 0.0;
  for (size_t i = 1; i < nodes_.size(); ++i) {
    double seg = (nodes_[i].pos - nodes_[i - 1].pos).norm();
    double a = s, b = s + seg;
    if (b > s0 && a < s1 && seg > 0.0) {
      if (out.empty()) {
        double u = std::clamp((s0 - a) / seg, 0.0, 1.0);
        out.push_back(lerp_node(nodes_[i - 1], nodes_[i], u));
      }
      if (b <= s1) {
        out.push_back(nodes_[i]);
      } else {
        double u = std::clamp((s1 - a) / seg, 0.0, 1.0);
        out.push_back(lerp_node(nodes_[i - 1], nodes_[i], u));
        break;
      }
    }
    s = b;
  }
  if (out.size() < 2) {  // degenerate sliver entirely inside one segment
    for (size_t i = 1; i < nodes_.size(); ++i) {
      double seg = (nodes_[i].pos - nodes_[i - 1].pos).norm();
      double a = arclength_at(i - 1);
      if (s0 >= a && s0 <= a + seg) {
        out.clear();
        out.push_back(lerp_node(nodes_[i - 1], nodes_[i], (s0 - a) / seg));
        out.push_back(lerp_node(nodes_[i - 1], nodes_[i],
                                std::min(1.0, (s1 - a) / seg)));
        break;
      }
    }
  }
  return Curve(std::move(out), h_max_);
}

Curve make_parametric(const std::function<Vec2(double)>& g,
                      const std::function<Vec2(double)>& dg,
                      const std::function<Vec2(double)>& ddg, double t0, double t1,
                      double h_max) {
  if (!(t1 > t0)) throw std::invalid_argument("need t1 > t0");
  // estimate arclength on a coarse scan to pick the sample count
  double speed_sum = 0.0;
  const int scan = 256;
  for (int i = 0; i < scan; ++i)
    speed_sum += dg(t0 + (t1 - t0) * (i + 0.5) / scan).norm();
  double est_len = speed_sum * (t1 - t0) / scan;
  size_t n = std::max<size_t>(8, size_t(1.5 * est_len / h_max) + 2);
  std::vector<CurveNode> nodes(n + 1);
  for (size_t i = 0; i <= n; ++i) {
    double t = t0 + (t1 - t0) * double(i) / double(n);
    Vec2 d = dg(t), dd = ddg(t);
    double sp = d.norm();
    if (sp < 1e-12) throw std::invalid_argument("parametrization is singular");
    nodes[i].pos = g(t);
    nodes[i].tangent = d * (1.0 / sp);
    nodes[i].curvature = d.cross(dd) / (sp * sp * sp);
  }
  Curve c(std::move(nodes), h_max);
  c.refine_to(h_max);
  return c;
}

Curve make_segment(const Vec2& a, const Vec2& b, double h_max) {
  Vec2 d = b - a;
  return make_parametric([&](double t) { return a + d * t; },
                         [&](double) { return d; },
                         [&](double) { return Vec2{0.0, 0.0}; }, 0.0, 1.0, h_max);
}

Curve make_circle(const Vec2& center, double radius, double h_max) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  return make_parametric(
      [&](double t) {
        return center + Vec2{radius * std::cos(kTwoPi * t), radius * std::sin(kTwoPi * t)};
      },
      [&](double t) {
        return Vec2{-kTwoPi * radius * std::sin(kTwoPi * t),
                    kTwoPi * radius * std::cos(kTwoPi * t)};
      },
      [&](double t) {
        return Vec2{-kTwoPi * kTwoPi * radius * std::cos(kTwoPi * t),
                    -kTwoPi * kTwoPi * radius * std::sin(kTwoPi * t)};
      },
      0.0, 1.0, h_max);
}

Curve push_curve(const Diffeo& f, const Curve& c) {
  // pre-refine so image chords stay below h_max
  double sup_d = 1.0;
  for (const auto& n : c.nodes())
    sup_d = std::max(sup_d, f.deriv(wrap(n.pos)).op_norm());
  Curve src = c;
  src.refine_to(c.h_max() / (1.25 * sup_d));

  std::vector<CurveNode> out(src.size());
  for (size_t i = 0; i < src.size(); ++i) {
    const CurveNode& nd = src.node(i);
    Jet j = f.jet(wrap(nd.pos));
    // the lift map is Z^2-equivariant, so lifting node positions directly
    // keeps the image chain continuous
    out[i].pos = f.eval_lift(nd.pos);
    Vec2 Dt = j.D.apply(nd.tangent);
    double sp = Dt.norm();
    out[i].tangent = Dt * (1.0 / sp);
    Vec2 d2tt = j.D2.apply(nd.tangent, nd.tangent);
    out[i].curvature = (nd.curvature * j.D.det() + Dt.cross(d2tt)) / (sp * sp * sp);
    out[i].log_density = nd.log_density - std::log(sp);
  }
  return Curve(std::move(out), c.h_max());
}

Curve push_curve(const DrivingMeasure& mu, const Word& w, const Curve& c) {
  Curve cur = c;
  for (uint32_t i : w.indices) cur = push_curve(mu.atom(i), cur);
  return cur;
}

std::vector<Curve> push_curve_stages(const DrivingMeasure& mu, const Word& w,
                                     const Curve& c) {
  std::vector<Curve> stages;
  stages.reserve(w.size() + 1);
  stages.push_back(c);
  for (uint32_t i : w.indices) stages.push_back(push_curve(mu.atom(i), stages.back()));
  return stages;
}

std::vector<Curve> cut_pieces(const Curve& c, double a) {
  if (a <= 0.0) throw std::invalid_argument("cut length must be positive");
  double l = c.length();
  if (l <= 2.0 * a) return {c};
  size_t n = size_t(l / a);
  double piece = l / double(n);
  std::vector<Curve> out;
  out.reserve(n);
  for (size_t k = 0; k < n; ++k)
    out.push_back(c.subcurve(piece * k, std::min(l, piece * (k + 1))));
  return out;
}

ComponentLengthReport component_length_check(const Curve& c, double rho,
                                             const std::vector<TorusPoint>& centers) {
  ComponentLengthReport rep;
  rep.bound = 4.0 * rho;
  for (const auto& x : centers) {
    double run = 0.0;
    bool inside = false;
    auto flush = [&]() {
      if (inside) {
        rep.worst_component = std::max(rep.worst_component, run);
        if (run > rep.bound * (1.0 + 1e-9)) ++rep.violations;
      }
      run = 0.0;
      inside = false;
    };
    for (size_t i = 0; i < c.size(); ++i) {
      bool in = dist(c.point(i), x) <= rho;
      if (in) {
        if (inside && i > 0) run += (c.node(i).pos - c.node(i - 1).pos).norm();
        inside = true;
      } else {
        flush();
      }
    }
    flush();
  }
  return rep;
}

BlockTallyReport block_tallies(const DrivingMeasure& mu, const Word& w,
                               const Curve& c, const Constants& cst) {
  size_t p0 = size_t(cst.p0);
  if (p0 == 0 || w.size() % p0 != 0)
    throw std::invalid_argument("word length must be a multiple of p0");
  size_t m = w.size() / p0;
  BlockTallyReport rep;
  rep.nct_counts.assign(m, 0);
  rep.et_counts.assign(m, 0);
  if (m < 2) return rep;

  // test points: nodes and chord midpoints of the initial curve
  std::vector<std::pair<TorusPoint, Vec2>> tests;
  tests.reserve(2 * c.size());
  for (size_t i = 0; i < c.size(); ++i) {
    tests.emplace_back(c.point(i), c.node(i).tangent);
    if (i + 1 < c.size()) {
      CurveNode mid = arc_midpoint(c.node(i), c.node(i + 1));
      tests.emplace_back(wrap(mid.pos), mid.tangent);
    }
  }

  double jac_bound = cst.C0 + 2.0 * cst.eps0 * double(p0);
  double exp_floor = std::exp(cst.c * double(p0));
  std::vector<char> nct_flag(m + 1, 0), et_flag(m + 1, 0);
  for (const auto& [p, v] : tests) {
    TorusPoint x = p;
    Vec2 u = v;
    double lj = 0.0, lj_prev = 0.0;
    double sp_prev = 1.0;
    for (size_t j = 1; j <= m; ++j) {
      for (size_t s = 0; s < p0; ++s) {
        const Diffeo& f = mu.atom(w.indices[(j - 1) * p0 + s]);
        Mat2 D = f.deriv(x);
        u = D.apply(u);
        lj += std::log(std::abs(D.det()));
        x = f.eval(x);
      }
      double sp = u.norm();
      if (j >= 2) {
        if (std::abs(lj - lj_prev) > jac_bound) nct_flag[j] = 1;
        if (sp / sp_prev < exp_floor) et_flag[j] = 1;
      }
      lj_prev = lj;
      sp_prev = sp;
    }
  }
  for (size_t k = 1; k <= m; ++k) {
    size_t nc = 0, ec = 0;
    for (size_t j = k + 1; j <= m; ++j) {
      nc += nct_flag[j];
      ec += et_flag[j];
    }
    rep.nct_counts[k - 1] = nc;
    rep.et_counts[k - 1] = ec;
    double budget = double(m - k) * cst.eta;
    if (nc > 0 && double(nc) >= budget) rep.nct_ok = false;
    if (ec > 0 && double(ec) >= budget) rep.et_ok = false;
  }
  return rep;
}

double density_log_lipschitz(const Curve& c) {
  double worst = 0.0;
  for (size_t i = 1; i < c.size(); ++i) {
    double gap = (c.node(i).pos - c.node(i - 1).pos).norm();
    if (gap <= 0.0) continue;
    worst = std::max(worst,
                     std::abs(c.node(i).log_density - c.node(i - 1).log_density) / gap);
  }
  return worst;
}

namespace {

GrowthAudit run_audit(const DrivingMeasure& mu, const Word& w, const Curve& c,
                      const Constants& cst, bool density) {
  size_t n = w.size();
  double K = c.max_abs_curvature();
  double L = density_log_lipschitz(c);
  double k1 = cst.K1(cst.c);
  double k2 = cst.K2(cst.c);
  GrowthAudit audit;
  Curve cur = c;
  for (size_t j = 0; j <= n; ++j) {
    double rate = double(n - j) * cst.eta * cst.C0p;
    double bound = density ? k2 * (L + 1.0) * (K + 1.0) * std::exp(11.0 * rate)
                           : k1 * (K + 1.0) * std::exp(8.0 * rate);
    double val = density ? density_log_lipschitz(cur) : cur.max_abs_curvature();
    double ratio = val / bound;
    if (ratio > audit.worst_ratio) {
      audit.worst_ratio = ratio;
      audit.worst_step = j;
    }
    if (j < n) cur = push_curve(mu.atom(w.indices[j]), cur);
  }
  audit.ok = audit.worst_ratio <= 1.0;
  return audit;
}

}  // namespace

GrowthAudit curvature_growth_audit(const DrivingMeasure& mu, const Word& w,
                                   const Curve& c, const Constants& cst) {
  return run_audit(mu, w, c, cst, false);
}

GrowthAudit density_growth_audit(const DrivingMeasure& mu, const Word& w,
                                 const Curve& c, const Constants& cst) {
  return run_audit(mu, w, c, cst, true);
}

}  // namespace rdslab
